"""
Tests for the command-line interface.
"""

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from isoflow.cli import (
    EXIT_DATA,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    cmd_geodesic,
    cmd_lowrank,
    cmd_metrics,
    cmd_sample,
    cmd_train,
    exit_code,
    main,
)
from isoflow.config import settings
from isoflow.datasets.csv_io import read_points_csv, write_points_csv
from isoflow.datasets.synthetic import sample_bimodal_gaussian, sample_hemisphere
from isoflow.diffeo.registry import get_diffeo
from isoflow.errors import ConfigError, DataFormatError, DomainError, ShapeError
from isoflow.flows.model import FlowModel

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def bimodal_csv(tmp_path):
    return write_points_csv(sample_bimodal_gaussian(30, seed=0), tmp_path / "bimodal.csv")


# --------------------------------------------------------------------------- commands


def test_sample_command(tmp_path):
    """Test sample writes the requested number of points."""
    summary = cmd_sample("hemisphere", 50, 0, tmp_path / "h.csv", noise_sigma=0.01)
    assert (summary["points"], summary["dim"]) == (50, 3)
    assert read_points_csv(tmp_path / "h.csv").shape == (50, 3)
    with pytest.raises(ConfigError):
        cmd_sample("spiral", 5, 0, tmp_path / "s.csv")


def test_geodesic_command_pins_endpoints(tmp_path):
    """Test steps + 1 rows are written with the given endpoints first and last."""
    out = tmp_path / "geo.csv"
    summary = cmd_geodesic("modeled", "0.5,0.2", "-0.3,0.4", 10, out)
    curve = read_points_csv(out)
    assert summary["rows"] == 11 and curve.shape == (11, 2)
    np.testing.assert_array_equal(curve[0], [0.5, 0.2])
    np.testing.assert_array_equal(curve[-1], [-0.3, 0.4])


def test_iso_geodesic_command_from_data_rows(tmp_path, bimodal_csv):
    """Test endpoints taken from data rows and the SVG overlay."""
    X = read_points_csv(bimodal_csv)
    summary = cmd_geodesic(
        "modeled", None, None, 8, tmp_path / "iso.csv", use_iso=True, M=50,
        data_path=bimodal_csv, from_row=0, to_row=3, svg=tmp_path / "iso.svg",
    )
    curve = read_points_csv(tmp_path / "iso.csv")
    assert summary["iso"] is True
    np.testing.assert_array_equal(curve[0], X[0])
    np.testing.assert_array_equal(curve[-1], X[3])
    assert (tmp_path / "iso.svg").read_text().lstrip().startswith("<?xml")


def test_geodesic_command_image_strip(tmp_path):
    """Test the PGM strip has one row of tiles per curve."""
    cmd_geodesic(
        "identity", "0,0.5,1,0.2", "1,0,0,0.9", 4, tmp_path / "g.csv",
        pgm=tmp_path / "g.pgm", image_shape=(2, 2),
    )
    assert (tmp_path / "g.pgm").read_bytes().startswith(b"P5\n22 10\n255\n")


def test_geodesic_command_errors(tmp_path, bimodal_csv):
    """Test bad step counts, missing endpoints, mismatched dimensions and bad rows."""
    out = tmp_path / "g.csv"
    with pytest.raises(ConfigError):
        cmd_geodesic("modeled", "0,0", "1,1", 0, out)
    with pytest.raises(ConfigError):
        cmd_geodesic("modeled", None, None, 4, out)
    with pytest.raises(ConfigError):
        cmd_geodesic("modeled", "0,a", "1,1", 4, out)
    with pytest.raises(ShapeError):
        cmd_geodesic("identity", "0,0", "1,1,1", 4, out)
    with pytest.raises(ConfigError):
        cmd_geodesic("modeled", None, None, 4, out, data_path=bimodal_csv, to_row=30)


def test_lowrank_command(tmp_path, bimodal_csv):
    """Test reconstructions and the JSON report for the iso and linear variants."""
    iso_summary = cmd_lowrank(
        "modeled", bimodal_csv, 1, "iso", tmp_path / "iso.csv", tmp_path / "iso.json", M=50
    )
    assert read_points_csv(tmp_path / "iso.csv").shape == (30, 2)
    assert json.loads((tmp_path / "iso.json").read_text())["variant"] == "iso"
    assert iso_summary["low_rank_rel_rmse"] >= 0.0

    linear = cmd_lowrank("identity", bimodal_csv, 1, "linear", tmp_path / "lin.csv")
    assert linear["diffeo"] == "identity"
    assert len(linear["singular_values"]) == 2

    with pytest.raises(ConfigError):
        cmd_lowrank("identity", bimodal_csv, 1, "cubic", tmp_path / "x.csv")


def test_metrics_command_under_identity(tmp_path, bimodal_csv):
    """Test a linear map has zero geodesic error and equal plain and iso reconstructions."""
    summary = cmd_metrics("identity", bimodal_csv, 1, tmp_path / "report.json", m=10, M=20)
    assert summary["geodesic_rel_rmse"] == pytest.approx(0.0, abs=1e-12)
    assert summary["low_rank_rel_rmse_plain"] == pytest.approx(
        summary["low_rank_rel_rmse_iso"], abs=1e-10
    )
    cloud = pd.read_csv(tmp_path / "report_geodesic_cloud.csv")
    assert list(cloud.columns) == ["dist_to_barycentre", "value"]
    assert len(cloud) == 30
    assert (tmp_path / "report_reconstruction_cloud.csv").exists()
    assert json.loads((tmp_path / "report.json").read_text())["points"] == 30


def test_given_base_point_replaces_barycentre(tmp_path, bimodal_csv):
    """Test lowrank and metrics anchor at a caller-supplied base point."""
    summary = cmd_lowrank(
        "identity", bimodal_csv, 1, "linear", tmp_path / "lin.csv", base_point="0.5,-0.5"
    )
    assert summary["base_point"] == [0.5, -0.5]
    cmd_metrics("identity", bimodal_csv, 1, tmp_path / "report.json", m=5, M=10, base_point="0,0")
    assert json.loads((tmp_path / "report.json").read_text())["base_point"] == [0.0, 0.0]
    with pytest.raises(ConfigError):
        cmd_lowrank("identity", bimodal_csv, 1, "iso", tmp_path / "x.csv", base_point="0,0,0")
    with pytest.raises(ConfigError):
        cmd_metrics("identity", bimodal_csv, 1, tmp_path / "r.json", base_point="0,zero")


def test_train_command(tmp_path, bimodal_csv):
    """Test training from a preset writes a loadable checkpoint and the loss history."""
    summary = cmd_train(
        "double_gaussian", bimodal_csv, tmp_path / "flow.json", tmp_path / "train.json", epochs=2
    )
    assert summary["epochs"] == 2
    assert (tmp_path / "train.csv").read_text().startswith("epoch,")
    model = get_diffeo(str(tmp_path / "flow.json"))
    assert isinstance(model, FlowModel) and model.dim == 2


def test_train_command_rejects_wrong_dimension(tmp_path):
    """Test data whose dimension differs from the flow's is a shape error."""
    data = write_points_csv(sample_hemisphere(10), tmp_path / "h.csv")
    with pytest.raises(ShapeError):
        cmd_train("double_gaussian", data, tmp_path / "flow.json", epochs=1)


def test_train_seed_precedence(tmp_path, bimodal_csv, capsys, monkeypatch):
    """Test --seed beats the config file seed, which beats the settings seed."""
    monkeypatch.setattr(settings, "seed", 5)
    config = json.loads((CONFIG_DIR / "double_gaussian.json").read_text())
    config.update(seed=7, epochs=1)
    config_path = tmp_path / "train.json"
    config_path.write_text(json.dumps(config))
    args = ["train", "--config", str(config_path), "--data", str(bimodal_csv)]

    assert main(args + ["--out", str(tmp_path / "a.json")]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["seed"] == 7
    assert main(args + ["--out", str(tmp_path / "b.json"), "--seed", "3"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["seed"] == 3

    del config["seed"]
    config_path.write_text(json.dumps(config))
    assert main(args + ["--out", str(tmp_path / "c.json")]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["seed"] == 5


# --------------------------------------------------------------------------- main


def test_exit_codes():
    """Test the error class to exit code mapping."""
    assert exit_code(ConfigError("x")) == EXIT_USAGE
    assert exit_code(ShapeError("x")) == EXIT_USAGE
    assert exit_code(DataFormatError("x")) == EXIT_DATA
    assert exit_code(DomainError("x")) == EXIT_NUMERICAL


def test_main_prints_json_summary(tmp_path, capsys):
    """Test a successful command exits 0 and prints its summary on stdout."""
    out = tmp_path / "s.csv"
    code = main(["sample", "--dataset", "double_gaussian", "--n", "5", "--out", str(out)])
    assert code == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["points"] == 5
    assert summary["out"] == str(out)


def test_main_missing_data_file(tmp_path, capsys):
    """Test a missing input file exits with the data error code."""
    code = main(
        [
            "lowrank", "--data", str(tmp_path / "missing.csv"), "--rank", "1",
            "--out-recon", str(tmp_path / "r.csv"),
        ]
    )
    assert code == EXIT_DATA
    assert "data_format_error" in capsys.readouterr().err


def _error_object(err: str) -> dict:
    """The JSON error object among stderr lines (log events carry an "event" key)."""
    for line in err.splitlines():
        if line.startswith("{"):
            record = json.loads(line)
            if "event" not in record:
                return record
    raise AssertionError(f"no error object in stderr: {err!r}")


@pytest.mark.parametrize("missing", ["checkpoint", "data"])
def test_main_unreadable_inputs(tmp_path, bimodal_csv, capsys, missing):
    """Test a missing checkpoint and a directory given as data both exit with the data code."""
    if missing == "checkpoint":
        diffeo, data = str(tmp_path / "missing_flow.json"), str(bimodal_csv)
    else:
        diffeo, data = "identity", str(tmp_path)
    code = main(
        [
            "lowrank", "--diffeo", diffeo, "--data", data,
            "--rank", "1", "--out-recon", str(tmp_path / "r.csv"),
        ]
    )
    assert code == EXIT_DATA
    assert _error_object(capsys.readouterr().err)["error"] == "data_format_error"


def test_main_argument_errors_are_json(capsys):
    """Test argument parsing failures print a JSON error and exit with the usage code."""
    assert main(["lowrank", "--rank", "one"]) == EXIT_USAGE
    error = _error_object(capsys.readouterr().err)
    assert error["error"] == "config_error"
    assert error["usage"].startswith("usage:")
    assert main(["unknown-command"]) == EXIT_USAGE


@pytest.mark.parametrize(
    "args",
    [
        ["geodesic", "--from", "0,0", "--to", "1,1", "--steps", "0"],
        ["lowrank", "--rank", "3", "--diffeo", "identity"],
        ["lowrank", "--rank", "1", "--diffeo", "identity", "--base-point", "0,0,0"],
    ],
)
def test_main_usage_errors(args, tmp_path, bimodal_csv):
    """Test invalid step counts and ranks exit with the usage code."""
    if args[0] == "lowrank":
        args = args + ["--data", str(bimodal_csv), "--out-recon", str(tmp_path / "r.csv")]
    else:
        args = args + ["--out", str(tmp_path / "g.csv")]
    assert main(args) == EXIT_USAGE


def test_main_experiment_without_mnist_files(tmp_path):
    """Test the MNIST workflow without IDX paths is a usage error."""
    assert main(["experiment", "mnist_reduced", "--out-dir", str(tmp_path)]) == EXIT_USAGE
    run = json.loads((tmp_path / "mnist_reduced" / "run.json").read_text())
    assert run["status"] == "failed"
