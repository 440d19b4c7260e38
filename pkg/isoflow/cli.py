"""
Command-line entry point.

Subcommands: sample, train, geodesic, lowrank, metrics, experiment. Results go to files and a
JSON summary is printed on stdout; failures print a JSON error object on stderr and exit with

- 2 for usage (including argument parsing) or configuration errors,
- 3 for data/format errors (including missing or unreadable files),
- 4 for numerical failures.
"""

import argparse
import json
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from isoflow.analysis.low_rank import pca_rank_r, tangent_rank_r
from isoflow.analysis.metrics import build_metrics_report, low_rank_rel_rmse
from isoflow.config import settings
from isoflow.datasets.csv_io import read_points_csv, write_points_csv
from isoflow.datasets.synthetic import sample_bimodal_gaussian, sample_hemisphere
from isoflow.diffeo.registry import get_diffeo
from isoflow.errors import (
    ConfigError,
    DataFormatError,
    IsoflowError,
    ShapeError,
)
from isoflow.flows.model import build_flow
from isoflow.geometry import iso, pullback
from isoflow.pipeline import WORKFLOWS, ExperimentRunner
from isoflow.plotting import plot_curves, write_image_strips
from isoflow.training.config import load_train_config, preset
from isoflow.training.trainer import train
from isoflow.utils.logging import (
    bind_run_context,
    clear_run_context,
    configure_logging,
    get_logger,
)

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

# raised by file access and pandas parsing before a library check can wrap them
INPUT_ERRORS = (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError)


class UsageErrorParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as ``ConfigError`` instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message, usage=self.format_usage().strip())


def exit_code(error: IsoflowError) -> int:
    """Map a library error to the process exit code."""
    if isinstance(error, (ConfigError, ShapeError)):
        return EXIT_USAGE
    if isinstance(error, DataFormatError):
        return EXIT_DATA
    return EXIT_NUMERICAL


def _emit(payload: dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2))


def _parse_point(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=np.float64)
    except ValueError as e:
        raise ConfigError(f"cannot parse point '{text}' (comma-separated floats expected)") from e


def _base_point(d: Any, X: np.ndarray, text: str | None) -> np.ndarray:
    if text is None:
        return pullback.barycentre(d, X)
    p = _parse_point(text)
    if p.size != X.shape[1]:
        raise ConfigError(
            f"base point has dimension {p.size}, data has dimension {X.shape[1]}",
            base_point=p.tolist(),
        )
    return p


def cmd_sample(
    dataset: str,
    n: int,
    seed: int | None,
    out: str | Path,
    noise_sigma: float = 0.0,
) -> dict[str, Any]:
    """
    Generate a synthetic data set as CSV.

    Args:
        dataset: ``double_gaussian`` or ``hemisphere``
        n: Number of points
        seed: RNG seed (``settings.seed`` when None)
        out: Output CSV
        noise_sigma: Ambient noise (hemisphere only)

    Returns:
        Summary of the written file
    """
    seed = settings.seed if seed is None else seed
    if dataset == "double_gaussian":
        X = sample_bimodal_gaussian(n, seed=seed)
    elif dataset == "hemisphere":
        X = sample_hemisphere(n, seed=seed, noise_sigma=noise_sigma)
    else:
        raise ConfigError(
            f"unknown dataset '{dataset}'", available=["double_gaussian", "hemisphere"]
        )
    path = write_points_csv(X, out)
    return {"out": str(path), "points": int(X.shape[0]), "dim": int(X.shape[1])}


def cmd_train(
    config: str,
    data_path: str | Path,
    out_checkpoint: str | Path,
    report_path: str | Path | None = None,
    seed: int | None = None,
    epochs: int | None = None,
) -> dict[str, Any]:
    """
    Train a flow on a CSV data set.

    Args:
        config: Config file (JSON/YAML) or preset name
        data_path: Training data CSV
        out_checkpoint: Checkpoint destination
        report_path: Optional training report JSON (a loss-history CSV is written next to it)
        seed: Overrides the config seed; without it a config file's own seed is kept and
            ``settings.seed`` is used otherwise
        epochs: Overrides the config epoch count

    Returns:
        Summary with the seed used and first/last epoch NLL
    """
    if Path(config).exists():
        cfg = load_train_config(config)
        config_seed = cfg.seed if "seed" in cfg.model_fields_set else None
    else:
        cfg, config_seed = preset(config), None
    update: dict[str, Any] = {}
    if seed is not None:
        update["seed"] = seed
    elif config_seed is None:
        update["seed"] = settings.seed
    if epochs is not None:
        update["epochs"] = epochs
    if update:
        cfg = cfg.model_copy(update=update)

    X = read_points_csv(data_path)
    if X.shape[1] != cfg.flow.ambient_dim:
        raise ShapeError(
            f"data dimension {X.shape[1]} does not match flow dimension {cfg.flow.ambient_dim}"
        )
    model = build_flow(cfg.flow, seed=cfg.seed)
    _, report = train(model, X, cfg, checkpoint_path=out_checkpoint)
    summary: dict[str, Any] = {
        "checkpoint": str(out_checkpoint),
        "seed": cfg.seed,
        "epochs": len(report.epochs),
        "nll_first_epoch": report.epochs[0].nll if report.epochs else None,
        "nll_last_epoch": report.epochs[-1].nll if report.epochs else None,
    }
    if report_path is not None:
        summary["report"] = str(report.write_json(report_path))
        summary["history"] = str(report.write_history_csv(Path(report_path).with_suffix(".csv")))
    return summary


def cmd_geodesic(
    diffeo: str,
    start: str | None,
    end: str | None,
    steps: int,
    out: str | Path,
    use_iso: bool = False,
    M: int | None = None,
    data_path: str | Path | None = None,
    from_row: int = 0,
    to_row: int = 1,
    svg: str | Path | None = None,
    pgm: str | Path | None = None,
    image_shape: tuple[int, int] = (28, 28),
) -> dict[str, Any]:
    """
    Sample a (iso-)geodesic between two points.

    Endpoints come either from ``start``/``end`` (comma-separated coordinates) or from two rows
    of a data CSV.

    Args:
        diffeo: ``modeled``, ``identity`` or a checkpoint path
        start: Start point text
        end: End point text
        steps: Number of intervals (steps + 1 rows are written)
        out: Output CSV
        use_iso: Constant ℓ²-speed reparametrization
        M: Iso discretization resolution
        data_path: Data CSV providing the endpoints
        from_row: Row index of the start point in ``data_path``
        to_row: Row index of the end point in ``data_path``
        svg: Optional SVG overlay with the straight line (d = 2, 3)
        pgm: Optional PGM strip of the interpolates (image data)
        image_shape: Image (H, W) for ``pgm``

    Returns:
        Summary of the written files
    """
    if steps < 1:
        raise ConfigError(f"steps must be >= 1, got {steps}")
    if data_path is not None:
        X = read_points_csv(data_path)
        for row in (from_row, to_row):
            if not 0 <= row < len(X):
                raise ConfigError(f"row {row} out of range for {len(X)} points")
        x, y = X[from_row], X[to_row]
    elif start is not None and end is not None:
        x, y = _parse_point(start), _parse_point(end)
    else:
        raise ConfigError("give --from/--to or --data")
    if x.shape != y.shape:
        raise ShapeError(f"endpoints differ in dimension ({x.size} vs {y.size})")

    d = get_diffeo(diffeo, dim=x.size)
    t = np.linspace(0.0, 1.0, steps + 1)
    curve = iso.iso_geodesic(d, x, y, t, M) if use_iso else pullback.geodesic(d, x, y, t)
    curve[0], curve[-1] = x, y
    write_points_csv(curve, out)
    summary: dict[str, Any] = {"out": str(out), "rows": len(curve), "iso": use_iso}

    if svg is not None:
        label = "iso-geodesic" if use_iso else "geodesic"
        plot_curves(svg, {label: curve, "linear": pullback.linear_interpolation(x, y, t)})
        summary["svg"] = str(svg)
    if pgm is not None:
        write_image_strips(pgm, [pullback.linear_interpolation(x, y, t), curve], image_shape)
        summary["pgm"] = str(pgm)
    return summary


def cmd_lowrank(
    diffeo: str,
    data_path: str | Path,
    rank: int,
    variant: str,
    out_recon: str | Path,
    out_report: str | Path | None = None,
    M: int | None = None,
    threads: int | None = None,
    base_point: str | None = None,
) -> dict[str, Any]:
    """
    Rank-r approximation of a data set about its barycentre or a given base point.

    Args:
        diffeo: ``modeled``, ``identity`` or a checkpoint path
        data_path: Data CSV
        rank: Target rank r
        variant: ``plain``, ``iso`` or ``linear``
        out_recon: Reconstructions CSV
        out_report: Optional metrics JSON
        M: Iso discretization resolution
        threads: Worker bound
        base_point: Base point text ``p1,p2,...`` (the Riemannian barycentre when None)

    Returns:
        Summary with the low-rank rel-RMSE
    """
    if variant not in {"plain", "iso", "linear"}:
        raise ConfigError(f"unknown variant '{variant}'", available=["plain", "iso", "linear"])
    X = read_points_csv(data_path)
    d = get_diffeo(diffeo, dim=X.shape[1])
    p = _base_point(d, X, base_point)
    if variant == "linear":
        result = pca_rank_r(X, p, rank)
    else:
        result = tangent_rank_r(d, X, p, rank, variant, M, threads)  # type: ignore[arg-type]
    write_points_csv(result.reconstructions, out_recon)

    summary = result.summary()
    summary.update(
        diffeo=d.name,
        base_point=p.tolist(),
        low_rank_rel_rmse=low_rank_rel_rmse(X, result.reconstructions, p),
        out=str(out_recon),
    )
    if out_report is not None:
        path = Path(out_report)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(summary, indent=2), encoding="utf-8")
        summary["report"] = str(path)
    return summary


def cmd_metrics(
    diffeo: str,
    data_path: str | Path,
    rank: int,
    out: str | Path,
    m: int | None = None,
    M: int | None = None,
    threads: int | None = None,
    base_point: str | None = None,
) -> dict[str, Any]:
    """
    Full metrics report plus both point clouds.

    The clouds are written next to ``out`` as ``<stem>_geodesic_cloud.csv`` and
    ``<stem>_reconstruction_cloud.csv``.

    Args:
        diffeo: ``modeled``, ``identity`` or a checkpoint path
        data_path: Data CSV
        rank: Target rank r
        out: MetricsReport JSON
        m: Samples per geodesic
        M: Iso discretization resolution
        threads: Worker bound
        base_point: Base point text ``p1,p2,...`` (the Riemannian barycentre when None)

    Returns:
        Headline metrics and written paths
    """
    X = read_points_csv(data_path)
    d = get_diffeo(diffeo, dim=X.shape[1])
    p = _base_point(d, X, base_point)
    report, _, _ = build_metrics_report(d, X, p=p, r=rank, m=m, M=M, threads=threads)

    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    geo_cloud, rec_cloud = report.cloud_frames()
    geo_path = out.with_name(f"{out.stem}_geodesic_cloud.csv")
    rec_path = out.with_name(f"{out.stem}_reconstruction_cloud.csv")
    geo_cloud.to_csv(geo_path, index=False)
    rec_cloud.to_csv(rec_path, index=False)
    return {
        **report.headline(),
        "out": str(out),
        "geodesic_cloud": str(geo_path),
        "reconstruction_cloud": str(rec_path),
    }


def cmd_experiment(
    name: str,
    out_dir: str | Path | None = None,
    seed: int | None = None,
    threads: int | None = None,
    **options: Any,
) -> dict[str, Any]:
    """
    Run a named experiment workflow.

    Args:
        name: Workflow name (see ``ExperimentRunner.workflows``)
        out_dir: Artifact directory (a subdirectory per workflow)
        seed: RNG seed
        threads: Worker bound
        **options: Further ExperimentRunner options

    Returns:
        Workflow status record

    Raises:
        IsoflowError: The workflow's own failure, re-raised for exit-code mapping
    """
    runner = ExperimentRunner(out_dir=out_dir, seed=seed, threads=threads, **options)
    run = runner.execute_workflow(name)
    if run.error is not None:
        raise run.error
    return run.to_dict()


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed", type=int, default=None, help="Random seed (overrides a config file seed)"
    )
    common.add_argument(
        "--threads", type=int, default=settings.threads, help="Worker threads for per-point work"
    )
    common.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default=None,
        help="Override ISOFLOW_LOG_LEVEL",
    )
    common.add_argument(
        "--log-format",
        choices=["json", "console"],
        default=None,
        help="Override ISOFLOW_LOG_FORMAT",
    )
    return common


def _geometry_options() -> argparse.ArgumentParser:
    geometry = argparse.ArgumentParser(add_help=False)
    geometry.add_argument(
        "--diffeo",
        default="modeled",
        help="Diffeomorphism: 'modeled', 'identity' or a flow checkpoint path",
    )
    geometry.add_argument(
        "--M", dest="M", type=int, default=settings.resolution, help="Iso discretization resolution"
    )
    return geometry


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser."""
    parser = UsageErrorParser(
        prog="isoflow",
        description="Pullback and iso-Riemannian geometry from constant-determinant flows",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common, geometry = _common_options(), _geometry_options()

    p = sub.add_parser("sample", parents=[common], help="Generate a synthetic data set")
    p.add_argument("--dataset", choices=["double_gaussian", "hemisphere"], required=True)
    p.add_argument("--n", type=int, required=True, help="Number of points")
    p.add_argument("--noise-sigma", type=float, default=0.0, help="Hemisphere ambient noise")
    p.add_argument("--out", required=True, help="Output CSV")
    p.set_defaults(
        handler=lambda a: cmd_sample(a.dataset, a.n, a.seed, a.out, noise_sigma=a.noise_sigma)
    )

    p = sub.add_parser("train", parents=[common], help="Train a flow")
    p.add_argument("--config", required=True, help="Config file (JSON/YAML) or preset name")
    p.add_argument("--data", required=True, help="Training data CSV")
    p.add_argument("--out", required=True, help="Checkpoint destination")
    p.add_argument("--report", default=None, help="Training report JSON")
    p.add_argument("--epochs", type=int, default=None, help="Override the epoch count")
    p.set_defaults(
        handler=lambda a: cmd_train(
            a.config, a.data, a.out, a.report, seed=a.seed, epochs=a.epochs
        )
    )

    p = sub.add_parser("geodesic", parents=[common, geometry], help="Sample a geodesic")
    p.add_argument("--from", dest="start", default=None, help="Start point 'x1,x2,...'")
    p.add_argument("--to", dest="end", default=None, help="End point 'y1,y2,...'")
    p.add_argument("--data", default=None, help="Data CSV providing the endpoints")
    p.add_argument("--from-row", type=int, default=0)
    p.add_argument("--to-row", type=int, default=1)
    p.add_argument("--steps", type=int, default=10, help="Intervals; steps + 1 rows are written")
    p.add_argument("--iso", action="store_true", help="Constant ℓ²-speed reparametrization")
    p.add_argument("--out", required=True, help="Output CSV")
    p.add_argument("--svg", default=None, help="SVG overlay (d = 2, 3)")
    p.add_argument("--pgm", default=None, help="PGM image strip (image data)")
    p.add_argument("--image-shape", type=int, nargs=2, default=[28, 28], metavar=("H", "W"))
    p.set_defaults(
        handler=lambda a: cmd_geodesic(
            a.diffeo,
            a.start,
            a.end,
            a.steps,
            a.out,
            use_iso=a.iso,
            M=a.M,
            data_path=a.data,
            from_row=a.from_row,
            to_row=a.to_row,
            svg=a.svg,
            pgm=a.pgm,
            image_shape=tuple(a.image_shape),
        )
    )

    p = sub.add_parser("lowrank", parents=[common, geometry], help="Rank-r approximation")
    p.add_argument("--data", required=True, help="Data CSV")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--variant", choices=["plain", "iso", "linear"], default="iso")
    p.add_argument("--out-recon", required=True, help="Reconstructions CSV")
    p.add_argument("--out-report", default=None, help="Metrics JSON")
    p.add_argument("--base-point", default=None, help="Base point 'p1,p2,...'")
    p.set_defaults(
        handler=lambda a: cmd_lowrank(
            a.diffeo,
            a.data,
            a.rank,
            a.variant,
            a.out_recon,
            a.out_report,
            M=a.M,
            threads=a.threads,
            base_point=a.base_point,
        )
    )

    p = sub.add_parser("metrics", parents=[common, geometry], help="Full metrics report")
    p.add_argument("--data", required=True, help="Data CSV")
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--m", type=int, default=settings.geodesic_samples, help="Samples per geodesic")
    p.add_argument("--out", required=True, help="MetricsReport JSON")
    p.add_argument("--base-point", default=None, help="Base point 'p1,p2,...'")
    p.set_defaults(
        handler=lambda a: cmd_metrics(
            a.diffeo,
            a.data,
            a.rank,
            a.out,
            m=a.m,
            M=a.M,
            threads=a.threads,
            base_point=a.base_point,
        )
    )

    p = sub.add_parser("experiment", parents=[common], help="Run a named experiment")
    p.add_argument(
        "name",
        choices=WORKFLOWS,
    )
    p.add_argument("--out-dir", default=None, help="Artifact directory")
    p.add_argument("--M", dest="M", type=int, default=settings.resolution)
    p.add_argument("--m", type=int, default=settings.geodesic_samples)
    p.add_argument("--epochs", type=int, default=None, help="Override the epoch count")
    p.add_argument("--train-points", type=int, default=1000)
    p.add_argument("--validation-points", type=int, default=100)
    p.add_argument("--mnist-images", default=None, help="MNIST IDX image file")
    p.add_argument("--mnist-labels", default=None, help="MNIST IDX label file")
    p.add_argument("--mnist-limit", type=int, default=4000)
    p.set_defaults(
        handler=lambda a: cmd_experiment(
            a.name,
            out_dir=a.out_dir,
            seed=a.seed,
            threads=a.threads,
            resolution=a.M,
            geodesic_samples=a.m,
            epochs=a.epochs,
            train_points=a.train_points,
            validation_points=a.validation_points,
            mnist_images=a.mnist_images,
            mnist_labels=a.mnist_labels,
            mnist_limit=a.mnist_limit,
        )
    )
    return parser


def _fail(error: IsoflowError) -> int:
    code = exit_code(error)
    logger.error("command_failed", error=error.kind, exit_code=code)
    print(json.dumps(error.to_dict(), default=str), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    """
    CLI entry point.

    Args:
        argv: Arguments (defaults to ``sys.argv[1:]``)

    Returns:
        Process exit code
    """
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        return _fail(e)
    if args.log_level or args.log_format:
        configure_logging(args.log_level, args.log_format)

    handler: Callable[[argparse.Namespace], dict[str, Any]] = args.handler
    bind_run_context(command=args.command, seed=args.seed)
    logger.info("command_started")
    try:
        _emit(handler(args))
    except IsoflowError as e:
        return _fail(e)
    except INPUT_ERRORS as e:
        wrapped = DataFormatError(
            str(e), cause=type(e).__name__, path=getattr(e, "filename", None)
        )
        return _fail(wrapped)
    finally:
        logger.info("command_finished")
        clear_run_context()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
