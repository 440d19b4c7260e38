"""
Inspection figures: SVG polylines/scatter for 2-D and 3-D data and PGM grids for images.
"""

from collections.abc import Mapping, Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from isoflow.diffeo.base import Array  # noqa: E402
from isoflow.errors import ShapeError  # noqa: E402
from isoflow.utils.logging import get_logger  # noqa: E402

logger = get_logger(__name__)


def plot_curves(
    path: str | Path,
    curves: Mapping[str, Array],
    points: Array | None = None,
    title: str | None = None,
) -> Path:
    """
    Overlay curves (polylines) and an optional scatter of data points.

    Args:
        path: Output SVG file
        curves: Label → (k, d) curve samples, d ∈ {2, 3}
        points: Optional (ℓ, d) scatter
        title: Figure title

    Returns:
        The written path

    Raises:
        ShapeError: If the dimension is not 2 or 3, or curves disagree in dimension
    """
    dims = {np.asarray(c).shape[-1] for c in curves.values()}
    if points is not None:
        dims.add(np.asarray(points).shape[-1])
    if len(dims) != 1 or not dims <= {2, 3}:
        raise ShapeError(f"curve overlays need a single dimension of 2 or 3, got {sorted(dims)}")
    dim = dims.pop()

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig = plt.figure(figsize=(5, 5))
    ax = fig.add_subplot(projection="3d" if dim == 3 else None)
    if points is not None:
        pts = np.atleast_2d(points)
        ax.scatter(*pts.T, s=4, c="0.6", label="data")
    for label, curve in curves.items():
        c = np.atleast_2d(curve)
        ax.plot(*c.T, linewidth=1.5, label=label)
    if dim == 2:
        ax.set_aspect("equal", adjustable="datalim")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info("figure_written", path=str(path), curves=len(curves))
    return path


def plot_error_cloud(path: str | Path, frame: pd.DataFrame, title: str | None = None) -> Path:
    """
    Scatter of a per-point error cloud (``dist_to_barycentre`` against ``value``).

    Args:
        path: Output SVG file
        frame: Cloud with columns dist_to_barycentre and value
        title: Figure title

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.scatter(frame["dist_to_barycentre"], frame["value"], s=6)
    ax.axhline(0.0, color="0.5", linewidth=0.8)
    ax.set_xlabel("distance to base point")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def image_grid(rows: Sequence[Array], shape: tuple[int, int], pad: int = 2) -> np.ndarray:
    """
    Tile flattened images into one 8-bit grid.

    Args:
        rows: One (k, H·W) array per grid row; values are clipped to [0, 1]
        shape: Image (H, W)
        pad: Border width in pixels between tiles

    Returns:
        (rows·(H+pad)+pad, k·(W+pad)+pad) uint8 array
    """
    h, w = shape
    cols = max(np.atleast_2d(r).shape[0] for r in rows)
    grid = np.zeros((len(rows) * (h + pad) + pad, cols * (w + pad) + pad), dtype=np.uint8)
    for i, row in enumerate(rows):
        for j, flat in enumerate(np.atleast_2d(row)):
            if flat.size != h * w:
                raise ShapeError(f"image of size {flat.size} does not match shape {shape}")
            tile = np.rint(255.0 * np.clip(flat.reshape(h, w), 0.0, 1.0)).astype(np.uint8)
            top, left = pad + i * (h + pad), pad + j * (w + pad)
            grid[top : top + h, left : left + w] = tile
    return grid


def write_pgm(path: str | Path, pixels: np.ndarray) -> Path:
    """Write a binary (P5) PGM file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + pixels.tobytes())
    logger.info("image_grid_written", path=str(path), shape=list(pixels.shape))
    return path


def write_image_strips(
    path: str | Path, rows: Sequence[Array], shape: tuple[int, int] = (28, 28)
) -> Path:
    """Tile image interpolation strips (one per row) and write them as PGM."""
    return write_pgm(path, image_grid(rows, shape))
