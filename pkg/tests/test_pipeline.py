"""
Tests for the experiment runner and the inspection figures.
"""

import json
import struct

import numpy as np
import pandas as pd
import pytest

from isoflow.errors import ConfigError, ShapeError
from isoflow.pipeline import WORKFLOWS, ExperimentRunner
from isoflow.plotting import image_grid, plot_curves, write_pgm


def _runner(tmp_path, **overrides):
    options = dict(
        out_dir=tmp_path,
        seed=0,
        resolution=30,
        geodesic_samples=10,
        epochs=1,
        train_points=40,
        validation_points=20,
    )
    options.update(overrides)
    return ExperimentRunner(**options)


def test_workflow_names(tmp_path):
    """Test the runner exposes exactly the published workflows."""
    assert sorted(_runner(tmp_path).workflows) == sorted(WORKFLOWS)
    with pytest.raises(ConfigError):
        _runner(tmp_path).execute_workflow("double_gaussian_unknown")


def test_double_gaussian_modeled_workflow(tmp_path):
    """Test the modeled workflow writes its metrics, clouds and figures."""
    run = _runner(tmp_path).execute_workflow("double_gaussian_modeled")
    assert run.status == "success", run.error
    run_dir = tmp_path / "double_gaussian_modeled"
    for name in ("metrics.json", "geodesic_cloud.csv", "reconstruction_cloud.csv",
                 "geodesic_cloud.svg", "reconstruction_cloud.svg", "geodesic.svg", "run.json"):
        assert (run_dir / name).exists(), name

    assert run.result["points"] == 20 and run.result["rank"] == 1
    assert run.result["geodesic_rel_rmse"] > 0.0
    assert len(pd.read_csv(run_dir / "geodesic_cloud.csv")) == 20
    record = json.loads((run_dir / "run.json").read_text())
    assert record["status"] == "success"
    assert record["result"] == run.to_dict()["result"]


def test_mnist_workflow_needs_idx_files(tmp_path):
    """Test missing IDX paths are recorded as a failed run."""
    run = _runner(tmp_path).execute_workflow("mnist_reduced")
    assert run.status == "failed"
    assert isinstance(run.error, ConfigError)
    assert run.to_dict()["error"]["error"] == "config_error"


@pytest.mark.slow
def test_double_gaussian_learned_workflow(tmp_path):
    """Test training and evaluation on the learned flow."""
    run = _runner(tmp_path, epochs=3).execute_workflow("double_gaussian_learned")
    assert run.status == "success", run.error
    run_dir = tmp_path / "double_gaussian_learned"
    assert (run_dir / "checkpoint.json").exists()
    assert len(pd.read_csv(run_dir / "loss_history.csv")) == 3
    assert np.isfinite(run.result["nll_last_epoch"])


@pytest.mark.slow
def test_hemisphere_workflow(tmp_path):
    """Test the rank-2 hemisphere evaluation."""
    run = _runner(tmp_path, epochs=2).execute_workflow("hemisphere")
    assert run.status == "success", run.error
    assert run.result["rank"] == 2
    assert run.result["low_rank_rel_rmse_iso"] >= 0.0


@pytest.mark.slow
def test_mnist_reduced_workflow(tmp_path):
    """Test the reduced MNIST workflow on random 28x28 digits."""
    rng = np.random.default_rng(0)
    count = 64
    pixels = rng.integers(0, 256, size=(count, 28, 28), dtype=np.uint8)
    images, labels = tmp_path / "images", tmp_path / "labels"
    images.write_bytes(struct.pack(">4i", 2051, count, 28, 28) + pixels.tobytes())
    labels.write_bytes(struct.pack(">2i", 2049, count) + bytes(count))
    run = _runner(
        tmp_path, validation_points=24, mnist_images=images, mnist_labels=labels
    ).execute_workflow("mnist_reduced")
    assert run.status == "success", run.error
    assert run.result["interpolation_finite"]
    assert (tmp_path / "mnist_reduced" / "interpolation.pgm").read_bytes().startswith(b"P5\n")


# --------------------------------------------------------------------------- plotting


def test_image_grid_layout():
    """Test tile placement, clipping and padding."""
    rows = [np.array([[0.0, 1.0, 2.0, -1.0]]), np.full((2, 4), 0.5)]
    grid = image_grid(rows, (2, 2), pad=1)
    assert grid.shape == (2 * 3 + 1, 2 * 3 + 1)
    np.testing.assert_array_equal(grid[1:3, 1:3], [[0, 255], [255, 0]])
    assert grid[4, 4] == 128
    assert grid[0].sum() == 0
    with pytest.raises(ShapeError):
        image_grid([np.zeros((1, 5))], (2, 2))


def test_write_pgm_header(tmp_path):
    """Test the binary PGM header carries width then height."""
    path = write_pgm(tmp_path / "out" / "g.pgm", np.zeros((3, 5), dtype=np.uint8))
    data = path.read_bytes()
    assert data.startswith(b"P5\n5 3\n255\n")
    assert len(data) == len(b"P5\n5 3\n255\n") + 15


def test_plot_curves_dimension_check(tmp_path):
    """Test overlays need curves of a single dimension 2 or 3."""
    t = np.linspace(0.0, 1.0, 5)[:, None]
    path = plot_curves(tmp_path / "c.svg", {"line": np.hstack([t, t, t])})
    assert path.exists()
    with pytest.raises(ShapeError):
        plot_curves(tmp_path / "bad.svg", {"a": np.zeros((3, 4))})
    with pytest.raises(ShapeError):
        plot_curves(tmp_path / "bad.svg", {"a": np.zeros((3, 2)), "b": np.zeros((3, 3))})
