"""
Experiment runner: named end-to-end workflows.

Workflows:
- double_gaussian_modeled: bimodal data evaluated under the modeled diffeomorphism
- double_gaussian_learned: bimodal data, flow training, evaluation under the learned flow
- hemisphere: hemisphere data, flow training, rank-2 evaluation
- mnist_reduced: reduced-scale MNIST training, digit interpolation and rank-20 evaluation
"""

import json
import time
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from isoflow.analysis.metrics import MetricsReport, build_metrics_report
from isoflow.config import settings
from isoflow.datasets.mnist import load_mnist_idx
from isoflow.datasets.synthetic import (
    sample_bimodal_gaussian,
    sample_hemisphere,
    train_validation_split,
)
from isoflow.diffeo.base import Array, Diffeomorphism
from isoflow.diffeo.modeled import ModeledDoubleGaussian
from isoflow.errors import ConfigError, IsoflowError
from isoflow.flows.model import FlowModel, build_flow
from isoflow.geometry import iso, pullback
from isoflow.plotting import plot_curves, plot_error_cloud, write_image_strips
from isoflow.training.config import TrainConfig, preset
from isoflow.training.trainer import TrainReport, train
from isoflow.utils.logging import bind_run_context, clear_run_context, get_logger

logger = get_logger(__name__)

WORKFLOWS = [
    "double_gaussian_modeled",
    "double_gaussian_learned",
    "hemisphere",
    "mnist_reduced",
]


@dataclass
class WorkflowRun:
    """Status record of one workflow execution."""

    workflow: str
    status: str
    duration_seconds: float
    result: dict[str, Any] | None = None
    error: IsoflowError | None = None

    def to_dict(self) -> dict[str, Any]:
        record: dict[str, Any] = {
            "workflow": self.workflow,
            "status": self.status,
            "duration_seconds": self.duration_seconds,
        }
        if self.result is not None:
            record["result"] = self.result
        if self.error is not None:
            record["error"] = self.error.to_dict()
        return record


class ExperimentRunner:
    """Runs the reference experiments and writes their artifacts under ``out_dir``."""

    def __init__(
        self,
        out_dir: str | Path | None = None,
        seed: int | None = None,
        threads: int | None = None,
        resolution: int | None = None,
        geodesic_samples: int | None = None,
        epochs: int | None = None,
        train_points: int = 1000,
        validation_points: int = 100,
        mnist_images: str | Path | None = None,
        mnist_labels: str | Path | None = None,
        mnist_limit: int = 4000,
    ) -> None:
        self.out_dir = Path(out_dir) if out_dir is not None else settings.output_dir
        self.seed = settings.seed if seed is None else seed
        self.threads = threads or settings.threads
        self.resolution = resolution or settings.resolution
        self.geodesic_samples = geodesic_samples or settings.geodesic_samples
        self.epochs = epochs
        self.train_points = train_points
        self.validation_points = validation_points
        self.mnist_images = mnist_images
        self.mnist_labels = mnist_labels
        self.mnist_limit = mnist_limit

        self.workflows: dict[str, Callable[[Path], dict[str, Any]]] = {
            "double_gaussian_modeled": self.workflow_double_gaussian_modeled,
            "double_gaussian_learned": self.workflow_double_gaussian_learned,
            "hemisphere": self.workflow_hemisphere,
            "mnist_reduced": self.workflow_mnist_reduced,
        }

    def execute_workflow(self, workflow_name: str) -> WorkflowRun:
        """
        Execute a named workflow with timing and status reporting.

        Library errors are captured in the returned record; anything else propagates.

        Args:
            workflow_name: Name of workflow to execute

        Returns:
            WorkflowRun (also written to ``<out_dir>/<workflow>/run.json``)

        Raises:
            ConfigError: If the workflow name is unknown
        """
        if workflow_name not in self.workflows:
            raise ConfigError(
                f"unknown workflow '{workflow_name}'", available=sorted(self.workflows)
            )

        run_dir = self.out_dir / workflow_name
        run_dir.mkdir(parents=True, exist_ok=True)
        bind_run_context(workflow=workflow_name)
        logger.info("workflow_started", seed=self.seed, out=str(run_dir))
        start_time = time.time()

        try:
            result = self.workflows[workflow_name](run_dir)
            run = WorkflowRun(
                workflow=workflow_name,
                status="success",
                duration_seconds=time.time() - start_time,
                result=result,
            )
            logger.info(
                "workflow_completed",
                workflow=workflow_name,
                duration_seconds=run.duration_seconds,
            )
        except IsoflowError as e:
            run = WorkflowRun(
                workflow=workflow_name,
                status="failed",
                duration_seconds=time.time() - start_time,
                error=e,
            )
            logger.error(
                "workflow_failed",
                workflow=workflow_name,
                duration_seconds=run.duration_seconds,
                error=str(e),
            )

        (run_dir / "run.json").write_text(json.dumps(run.to_dict(), indent=2), encoding="utf-8")
        clear_run_context("workflow")
        return run

    def _config(self, name: str) -> TrainConfig:
        cfg = preset(name, seed=self.seed)
        if self.epochs is not None:
            cfg = cfg.model_copy(update={"epochs": self.epochs})
        return cfg

    def _train(self, cfg: TrainConfig, X: Array, run_dir: Path) -> tuple[FlowModel, TrainReport]:
        model = build_flow(cfg.flow, seed=cfg.seed)
        model, report = train(model, X, cfg, checkpoint_path=run_dir / "checkpoint.json")
        report.write_json(run_dir / "train_report.json")
        report.write_history_csv(run_dir / "loss_history.csv")
        return model, report

    def _evaluate(self, d: Diffeomorphism, X: Array, r: int, run_dir: Path) -> MetricsReport:
        report, _, _ = build_metrics_report(
            d, X, r=r, m=self.geodesic_samples, M=self.resolution, threads=self.threads
        )
        (run_dir / "metrics.json").write_text(report.model_dump_json(indent=2), encoding="utf-8")
        geo_cloud, rec_cloud = report.cloud_frames()
        geo_cloud.to_csv(run_dir / "geodesic_cloud.csv", index=False)
        rec_cloud.to_csv(run_dir / "reconstruction_cloud.csv", index=False)
        if d.dim in (2, 3):
            plot_error_cloud(run_dir / "geodesic_cloud.svg", geo_cloud, "geodesic discrepancy")
            plot_error_cloud(run_dir / "reconstruction_cloud.svg", rec_cloud, "plain - iso error")
        return report

    def _overlay(self, d: Diffeomorphism, X: Array, run_dir: Path) -> None:
        x, y = X[np.argmin(X[:, 0])], X[np.argmax(X[:, 0])]
        t = np.linspace(0.0, 1.0, 101)
        plot_curves(
            run_dir / "geodesic.svg",
            {
                "geodesic": pullback.geodesic(d, x, y, t),
                "linear": pullback.linear_interpolation(x, y, t),
            },
            points=X,
        )

    @staticmethod
    def _summary(metrics: MetricsReport, train_report: TrainReport | None = None) -> dict[str, Any]:
        summary = {
            key: value
            for key, value in metrics.headline().items()
            if key.endswith("rel_rmse") or key in {"rank", "points"}
        }
        if train_report is not None and train_report.epochs:
            summary["nll_first_epoch"] = train_report.epochs[0].nll
            summary["nll_last_epoch"] = train_report.epochs[-1].nll
        return summary

    def workflow_double_gaussian_modeled(self, run_dir: Path) -> dict[str, Any]:
        """
        Evaluate bimodal data under the modeled pullback geometry.

        Returns:
            Workflow results
        """
        X = sample_bimodal_gaussian(self.validation_points, seed=self.seed)
        d = ModeledDoubleGaussian()
        metrics = self._evaluate(d, X, 1, run_dir)
        self._overlay(d, X, run_dir)
        return self._summary(metrics)

    def workflow_double_gaussian_learned(self, run_dir: Path) -> dict[str, Any]:
        """
        Train a flow on bimodal data and evaluate the learned geometry.

        Returns:
            Workflow results
        """
        total = self.train_points + self.validation_points
        data = sample_bimodal_gaussian(total, seed=self.seed)
        X_train, X_val = train_validation_split(data, self.validation_points / total, self.seed)
        logger.info("double_gaussian_step", step=1, action="training")
        model, train_report = self._train(self._config("double_gaussian"), X_train, run_dir)
        logger.info("double_gaussian_step", step=2, action="evaluating")
        metrics = self._evaluate(model, X_val, 1, run_dir)
        self._overlay(model, X_val, run_dir)
        return self._summary(metrics, train_report)

    def workflow_hemisphere(self, run_dir: Path) -> dict[str, Any]:
        """
        Train a flow on hemisphere samples and run the rank-2 evaluation.

        Returns:
            Workflow results
        """
        X_train = sample_hemisphere(self.train_points, seed=self.seed)
        X_val = sample_hemisphere(self.validation_points, seed=self.seed + 1)
        logger.info("hemisphere_step", step=1, action="training")
        model, train_report = self._train(self._config("hemisphere"), X_train, run_dir)
        logger.info("hemisphere_step", step=2, action="evaluating")
        metrics = self._evaluate(model, X_val, 2, run_dir)
        self._overlay(model, X_val, run_dir)
        return self._summary(metrics, train_report)

    def workflow_mnist_reduced(self, run_dir: Path) -> dict[str, Any]:
        """
        Reduced-scale MNIST: train, interpolate between two validation digits, rank-20 metrics.

        Returns:
            Workflow results
        """
        if self.mnist_images is None or self.mnist_labels is None:
            raise ConfigError("mnist_reduced needs --mnist-images and --mnist-labels")
        validation = min(128, self.validation_points)
        data, _ = load_mnist_idx(self.mnist_images, self.mnist_labels, self.mnist_limit)
        X_train, X_val = train_validation_split(data, validation / len(data), self.seed)

        logger.info("mnist_step", step=1, action="training")
        model, train_report = self._train(self._config("mnist_reduced"), X_train, run_dir)

        logger.info("mnist_step", step=2, action="interpolating")
        x, y = X_val[0], X_val[1]
        t = np.linspace(0.0, 1.0, 8)
        curve = pullback.geodesic(model, x, y, t)
        iso_curve = iso.iso_geodesic(model, x, y, t, self.resolution)
        write_image_strips(
            run_dir / "interpolation.pgm",
            [pullback.linear_interpolation(x, y, t), curve, iso_curve],
        )

        logger.info("mnist_step", step=3, action="evaluating")
        metrics = self._evaluate(model, X_val, 20, run_dir)
        summary = self._summary(metrics, train_report)
        summary["interpolation_finite"] = bool(
            np.all(np.isfinite(curve)) and np.all(np.isfinite(iso_curve))
        )
        return summary
