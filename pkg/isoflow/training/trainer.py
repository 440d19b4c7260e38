"""
Epoch loop minimizing the weight-decayed flow loss with Adam.
"""

import time
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from pydantic import BaseModel, Field

from isoflow.diffeo.base import as_batch
from isoflow.errors import DataFormatError, TrainingDivergedError
from isoflow.flows.checkpoint import save_checkpoint
from isoflow.flows.model import FlowModel
from isoflow.training.config import TrainConfig
from isoflow.training.loss import loss_terms_and_grad
from isoflow.training.optimizer import AdamState, adam_step
from isoflow.utils.logging import get_logger

logger = get_logger(__name__)


class EpochRecord(BaseModel):
    """Batch-size-weighted means over one epoch."""

    epoch: int
    nll: float
    weight_decay: float
    loss: float
    seconds: float


class TrainReport(BaseModel):
    """Loss history and provenance of a training run."""

    config: TrainConfig
    points: int
    epochs: list[EpochRecord] = Field(default_factory=list)
    wall_clock_seconds: float = 0.0
    checkpoint_path: str | None = None

    def history_frame(self) -> pd.DataFrame:
        """Per-epoch losses as a DataFrame."""
        return pd.DataFrame([record.model_dump() for record in self.epochs])

    def write_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        return path

    def write_history_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.history_frame().to_csv(path, index=False)
        return path


def epoch_permutation(n: int, seed: int, epoch: int) -> np.ndarray:
    """Seeded shuffle for one epoch."""
    return np.random.default_rng([seed, epoch]).permutation(n)


def train(
    model: FlowModel,
    data: ArrayLike,
    cfg: TrainConfig,
    checkpoint_path: str | Path | None = None,
) -> tuple[FlowModel, TrainReport]:
    """
    Train a flow on a data matrix.

    Actnorm layers awaiting data-dependent init are initialized from the first batch of the
    first epoch. The last partial batch of every epoch is used.

    Args:
        model: Flow model (parameters are updated in place)
        data: (ℓ, d) training data
        cfg: Training configuration
        checkpoint_path: Optional checkpoint written after the last epoch

    Returns:
        Tuple of (model, report)

    Raises:
        TrainingDivergedError: If the loss, gradient or parameters become non-finite
    """
    X, _ = as_batch(data, model.dim)
    n = X.shape[0]
    if n == 0:
        raise DataFormatError("training data is empty")

    params = model.params
    state = AdamState.zeros(len(params))
    report = TrainReport(config=cfg, points=n)
    started = time.time()
    logger.info(
        "training_started",
        points=n,
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
        weight_decay=cfg.weight_decay,
        params=len(params),
        seed=cfg.seed,
    )

    for epoch in range(cfg.epochs):
        epoch_start = time.time()
        perm = epoch_permutation(n, cfg.seed, epoch)
        if epoch == 0 and not model.actnorm_initialized:
            model.initialize_actnorm(X[perm[: cfg.batch_size]])

        sums = np.zeros(2)
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            batch = X[perm[start : start + cfg.batch_size]]
            terms, grad = loss_terms_and_grad(model, batch, cfg.weight_decay)
            if not np.isfinite(terms.total) or not np.all(np.isfinite(grad)):
                blocks = params.nonfinite_blocks(grad) or params.nonfinite_blocks()
                logger.error("training_diverged", epoch=epoch, batch=b, blocks=blocks)
                raise TrainingDivergedError(
                    f"non-finite loss or gradient at epoch {epoch}, batch {b}",
                    epoch=epoch,
                    batch=b,
                    blocks=blocks,
                )
            adam_step(state, params.values, grad, cfg.learning_rate, cfg.betas, cfg.eps)
            sums += len(batch) * np.array([terms.nll, terms.weight_decay])

        nll_mean, decay_mean = sums / n
        record = EpochRecord(
            epoch=epoch,
            nll=float(nll_mean),
            weight_decay=float(decay_mean),
            loss=float(nll_mean + decay_mean),
            seconds=time.time() - epoch_start,
        )
        report.epochs.append(record)
        logger.info("epoch_complete", **record.model_dump())

    report.wall_clock_seconds = time.time() - started
    if checkpoint_path is not None:
        report.checkpoint_path = str(save_checkpoint(model, checkpoint_path))
    logger.info(
        "training_complete",
        epochs=cfg.epochs,
        final_nll=report.epochs[-1].nll,
        duration_seconds=report.wall_clock_seconds,
    )
    return model, report
