"""
MNIST IDX reader.

Format (big endian): i32 magic, i32 count, then for images i32 rows, i32 cols; followed by
unsigned bytes. Image magic is 2051 and label magic 2049. Gzipped files (``.gz``) are read
transparently.
"""

import gzip
import struct
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from isoflow.diffeo.base import Array
from isoflow.errors import DataFormatError
from isoflow.utils.logging import get_logger

logger = get_logger(__name__)

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049


def _read_bytes(path: Path) -> bytes:
    if not path.exists():
        raise DataFormatError(f"file not found: {path}", path=str(path))
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def _header(raw: bytes, words: int, magic: int, path: Path) -> tuple[int, ...]:
    if len(raw) < 4 * words:
        raise DataFormatError(f"truncated IDX header in {path}", path=str(path))
    header = struct.unpack(f">{words}i", raw[: 4 * words])
    if header[0] != magic:
        raise DataFormatError(
            f"magic number mismatch in {path} ({header[0]})", path=str(path), expected=magic
        )
    return header


def _images(raw: bytes, path: Path, limit: int | None) -> NDArray[np.uint8]:
    _, count, rows, cols = _header(raw, 4, IMAGE_MAGIC, path)
    keep = count if limit is None else min(count, limit)
    needed = 16 + keep * rows * cols
    if len(raw) < needed:
        raise DataFormatError(
            f"truncated image file {path}: need {needed} bytes, have {len(raw)}", path=str(path)
        )
    pixels = np.frombuffer(raw, dtype=np.uint8, count=keep * rows * cols, offset=16)
    return pixels.reshape(keep, rows, cols)


def _labels(raw: bytes, path: Path, limit: int | None) -> NDArray[np.uint8]:
    _, count = _header(raw, 2, LABEL_MAGIC, path)
    keep = count if limit is None else min(count, limit)
    if len(raw) < 8 + keep:
        raise DataFormatError(f"truncated label file {path}", path=str(path))
    return np.frombuffer(raw, dtype=np.uint8, count=keep, offset=8)


def read_idx_images(path: str | Path, limit: int | None = None) -> NDArray[np.uint8]:
    """
    Read an IDX image file.

    Args:
        path: Image file
        limit: Maximum number of images

    Returns:
        (count, rows, cols) uint8 array
    """
    path = Path(path)
    return _images(_read_bytes(path), path, limit)


def read_idx_labels(path: str | Path, limit: int | None = None) -> NDArray[np.uint8]:
    """
    Read an IDX label file.

    Args:
        path: Label file
        limit: Maximum number of labels

    Returns:
        (count,) uint8 array
    """
    path = Path(path)
    return _labels(_read_bytes(path), path, limit)


def load_mnist_idx(
    images_path: str | Path, labels_path: str | Path, limit: int | None = None
) -> tuple[Array, NDArray[np.int64]]:
    """
    Load MNIST images scaled to [0, 1] and flattened row-major, with their labels.

    Args:
        images_path: IDX image file
        labels_path: IDX label file
        limit: Maximum number of examples

    Returns:
        Tuple of ((count, rows·cols) float64 data, (count,) labels)

    Raises:
        DataFormatError: On bad magic numbers, truncated files or count mismatches
    """
    images_path, labels_path = Path(images_path), Path(labels_path)
    image_raw = _read_bytes(images_path)
    label_raw = _read_bytes(labels_path)
    image_count = _header(image_raw, 4, IMAGE_MAGIC, images_path)[1]
    label_count = _header(label_raw, 2, LABEL_MAGIC, labels_path)[1]
    if image_count != label_count:
        raise DataFormatError(
            f"image count {image_count} does not match label count {label_count}",
            images=str(images_path),
            labels=str(labels_path),
        )
    images = _images(image_raw, images_path, limit)
    labels = _labels(label_raw, labels_path, limit)
    data = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    logger.info("mnist_loaded", count=len(data), dim=data.shape[1], path=str(images_path))
    return data, labels.astype(np.int64)
