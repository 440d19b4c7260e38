"""
Tests for the synthetic samplers, the MNIST IDX reader and point-matrix CSV files.
"""

import gzip
import struct

import numpy as np
import pytest

from isoflow.datasets.csv_io import read_points_csv, write_points_csv
from isoflow.datasets.mnist import (
    IMAGE_MAGIC,
    LABEL_MAGIC,
    load_mnist_idx,
    read_idx_images,
    read_idx_labels,
)
from isoflow.datasets.synthetic import (
    sample_bimodal_gaussian,
    sample_hemisphere,
    train_validation_split,
)
from isoflow.errors import ConfigError, DataFormatError


def _idx_images(pixels: np.ndarray, magic: int = IMAGE_MAGIC) -> bytes:
    count, rows, cols = pixels.shape
    return struct.pack(">4i", magic, count, rows, cols) + pixels.astype(np.uint8).tobytes()


def _idx_labels(labels: np.ndarray, magic: int = LABEL_MAGIC) -> bytes:
    return struct.pack(">2i", magic, len(labels)) + labels.astype(np.uint8).tobytes()


@pytest.fixture
def idx_files(tmp_path):
    pixels = np.arange(5 * 3 * 2).reshape(5, 3, 2) * 8
    labels = np.array([3, 1, 4, 1, 5])
    images_path = tmp_path / "images-idx3-ubyte"
    labels_path = tmp_path / "labels-idx1-ubyte"
    images_path.write_bytes(_idx_images(pixels))
    labels_path.write_bytes(_idx_labels(labels))
    return images_path, labels_path, pixels, labels


# --------------------------------------------------------------------------- mnist


def test_read_idx_files(idx_files):
    """Test images and labels come back with their shapes and values."""
    images_path, labels_path, pixels, labels = idx_files
    np.testing.assert_array_equal(read_idx_images(images_path), pixels)
    np.testing.assert_array_equal(read_idx_labels(labels_path), labels)
    assert read_idx_images(images_path, limit=2).shape == (2, 3, 2)
    assert read_idx_labels(labels_path, limit=10).shape == (5,)


def test_load_mnist_scales_and_flattens(idx_files):
    """Test pixels are scaled into [0, 1] and flattened row-major."""
    images_path, labels_path, pixels, labels = idx_files
    X, y = load_mnist_idx(images_path, labels_path, limit=4)
    assert X.shape == (4, 6)
    assert X.min() >= 0.0 and X.max() <= 1.0
    np.testing.assert_allclose(X[1], pixels[1].reshape(-1) / 255.0)
    np.testing.assert_array_equal(y, labels[:4])
    assert y.dtype == np.int64


def test_load_mnist_reads_gzip(idx_files, tmp_path):
    """Test .gz files are decompressed transparently."""
    images_path, labels_path, pixels, _ = idx_files
    gz = tmp_path / "images.gz"
    gz.write_bytes(gzip.compress(images_path.read_bytes()))
    np.testing.assert_array_equal(read_idx_images(gz), pixels)
    X, _ = load_mnist_idx(gz, labels_path)
    assert X.shape == (5, 6)


def test_idx_magic_mismatch(tmp_path):
    """Test swapped image and label files are rejected."""
    path = tmp_path / "labels"
    path.write_bytes(_idx_labels(np.zeros(3)))
    with pytest.raises(DataFormatError) as excinfo:
        read_idx_images(path)
    assert excinfo.value.context["expected"] == IMAGE_MAGIC


def test_idx_truncated(tmp_path):
    """Test short headers and short pixel payloads are rejected."""
    short_header = tmp_path / "short"
    short_header.write_bytes(b"\x00\x00")
    with pytest.raises(DataFormatError):
        read_idx_images(short_header)

    payload = _idx_images(np.zeros((4, 2, 2)))
    short_body = tmp_path / "body"
    short_body.write_bytes(payload[:-3])
    with pytest.raises(DataFormatError):
        read_idx_images(short_body)
    assert read_idx_images(short_body, limit=3).shape == (3, 2, 2)


def test_idx_count_mismatch(tmp_path):
    """Test image and label counts must agree."""
    images_path, labels_path = tmp_path / "images", tmp_path / "labels"
    images_path.write_bytes(_idx_images(np.zeros((3, 2, 2))))
    labels_path.write_bytes(_idx_labels(np.zeros(4)))
    with pytest.raises(DataFormatError):
        load_mnist_idx(images_path, labels_path)


def test_idx_missing_file(tmp_path):
    """Test a missing file is a data error."""
    with pytest.raises(DataFormatError):
        read_idx_labels(tmp_path / "nope")


# --------------------------------------------------------------------------- synthetic


def test_bimodal_gaussian_has_two_modes(modeled):
    """Test samples split evenly between the two latent modes inside the image."""
    X = sample_bimodal_gaussian(2000, seed=0)
    assert X.shape == (2000, 2)
    latent = modeled.forward(X)
    assert np.all(modeled.contains(latent))
    upper = np.mean(latent[:, 1] > 0.0)
    assert 0.45 < upper < 0.55
    assert np.mean(np.abs(latent[:, 1])) > 0.6
    assert np.std(latent[:, 0]) == pytest.approx(0.1, rel=0.1)


def test_bimodal_gaussian_is_seeded():
    """Test equal seeds give equal samples."""
    first = sample_bimodal_gaussian(20, seed=5)
    np.testing.assert_array_equal(first, sample_bimodal_gaussian(20, seed=5))
    assert not np.array_equal(first, sample_bimodal_gaussian(20, seed=6))
    with pytest.raises(ConfigError):
        sample_bimodal_gaussian(0)


def test_hemisphere_samples_lie_on_the_upper_sphere():
    """Test unit norm, x₃ ≥ 0 and E[x₃] = 1/2 for the uniform distribution."""
    X = sample_hemisphere(100_000, seed=0)
    np.testing.assert_allclose(np.linalg.norm(X, axis=1), 1.0)
    assert np.all(X[:, 2] >= 0.0)
    assert X[:, 2].mean() == pytest.approx(0.5, abs=0.01)


def test_hemisphere_noise():
    """Test noisy samples leave the sphere and negative noise levels are rejected."""
    X = sample_hemisphere(500, seed=1, noise_sigma=0.05)
    radii = np.linalg.norm(X, axis=1)
    assert not np.allclose(radii, 1.0)
    assert abs(radii.mean() - 1.0) < 0.02
    with pytest.raises(ConfigError):
        sample_hemisphere(10, noise_sigma=-1.0)


def test_train_validation_split():
    """Test the split is a seeded partition of the rows."""
    X = np.arange(40.0).reshape(20, 2)
    train, validation = train_validation_split(X, 0.25, seed=3)
    assert (len(train), len(validation)) == (15, 5)
    rows = np.concatenate([train, validation])
    np.testing.assert_array_equal(np.sort(rows[:, 0]), X[:, 0])
    again, _ = train_validation_split(X, 0.25, seed=3)
    np.testing.assert_array_equal(train, again)
    with pytest.raises(ConfigError):
        train_validation_split(X, 1.0)


# --------------------------------------------------------------------------- csv


def test_points_csv_round_trip(tmp_path, rng):
    """Test written matrices read back exactly with the dim_j header."""
    X = rng.normal(size=(7, 3))
    path = write_points_csv(X, tmp_path / "nested" / "points.csv")
    assert path.read_text().splitlines()[0] == "dim_0,dim_1,dim_2"
    np.testing.assert_array_equal(read_points_csv(path), X)


@pytest.mark.parametrize(
    "content",
    [
        "x,y\n1,2\n",
        "dim_0,dim_1\n1,abc\n",
        "dim_0,dim_1\n",
        "dim_0,dim_1\n1,inf\n",
        "",
    ],
)
def test_points_csv_rejects_bad_files(tmp_path, content):
    """Test bad headers, non-numeric cells, empty files and non-finite values."""
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(DataFormatError):
        read_points_csv(path)


def test_points_csv_missing_file(tmp_path):
    """Test a missing file is a data error."""
    with pytest.raises(DataFormatError):
        read_points_csv(tmp_path / "missing.csv")
