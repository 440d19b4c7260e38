"""
Point-matrix CSV files: one point per row, no index column, header dim_0..dim_{d−1}.
"""

from pathlib import Path

import numpy as np
import pandas as pd

from isoflow.diffeo.base import Array
from isoflow.errors import DataFormatError


def points_frame(X: Array) -> pd.DataFrame:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return pd.DataFrame(X, columns=[f"dim_{j}" for j in range(X.shape[1])])


def write_points_csv(X: Array, path: str | Path) -> Path:
    """
    Write a data matrix.

    Args:
        X: (ℓ, d) matrix
        path: Destination file (parent directories are created)

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    points_frame(X).to_csv(path, index=False)
    return path


def read_points_csv(path: str | Path) -> Array:
    """
    Read a data matrix.

    Args:
        path: CSV file with header dim_0..dim_{d−1}

    Returns:
        (ℓ, d) float64 matrix

    Raises:
        DataFormatError: If the file is missing, malformed or non-numeric
    """
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"data file not found: {path}", path=str(path))
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataFormatError(f"cannot parse {path}: {e}", path=str(path)) from e
    expected = [f"dim_{j}" for j in range(frame.shape[1])]
    if list(frame.columns) != expected:
        raise DataFormatError(
            f"unexpected header in {path}", path=str(path), header=list(map(str, frame.columns))
        )
    try:
        X = frame.to_numpy(dtype=np.float64)
    except ValueError as e:
        raise DataFormatError(f"non-numeric values in {path}", path=str(path)) from e
    if X.shape[0] == 0:
        raise DataFormatError(f"no data rows in {path}", path=str(path))
    if not np.all(np.isfinite(X)):
        bad = np.flatnonzero(~np.all(np.isfinite(X), axis=1)).tolist()
        raise DataFormatError(f"non-finite values in {path}", path=str(path), indices=bad)
    return X
