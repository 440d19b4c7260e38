"""Synthetic generators, MNIST ingestion and point-matrix CSV I/O."""

from isoflow.datasets.csv_io import read_points_csv, write_points_csv
from isoflow.datasets.mnist import load_mnist_idx, read_idx_images, read_idx_labels
from isoflow.datasets.synthetic import (
    SAMPLERS,
    sample_bimodal_gaussian,
    sample_hemisphere,
    train_validation_split,
)

__all__ = [
    "SAMPLERS",
    "load_mnist_idx",
    "read_idx_images",
    "read_idx_labels",
    "read_points_csv",
    "sample_bimodal_gaussian",
    "sample_hemisphere",
    "train_validation_split",
    "write_points_csv",
]
