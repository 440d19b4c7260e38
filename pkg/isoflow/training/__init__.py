"""Maximum-likelihood training of flows."""

from isoflow.training.config import TrainConfig, load_train_config, preset
from isoflow.training.loss import LossTerms, loss_and_grad, loss_terms_and_grad, nll
from isoflow.training.optimizer import AdamState, adam_step
from isoflow.training.trainer import EpochRecord, TrainReport, train

__all__ = [
    "AdamState",
    "EpochRecord",
    "LossTerms",
    "TrainConfig",
    "TrainReport",
    "adam_step",
    "load_train_config",
    "loss_and_grad",
    "loss_terms_and_grad",
    "nll",
    "preset",
    "train",
]
