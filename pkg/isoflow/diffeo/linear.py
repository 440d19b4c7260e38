"""Identity and affine-linear diffeomorphisms (reference and test fixtures)."""

import numpy as np
from numpy.typing import ArrayLike

from isoflow.diffeo.base import Array, Diffeomorphism
from isoflow.errors import ConfigError


class Identity(Diffeomorphism):
    """φ(x) = x; every pullback mapping reduces to its Euclidean counterpart."""

    name = "identity"

    def _forward(self, x: Array) -> Array:
        return x.copy()

    def _inverse(self, y: Array) -> Array:
        return y.copy()

    def _jvp(self, x: Array, v: Array) -> Array:
        return v.copy()

    def _inverse_jvp(self, y: Array, w: Array) -> Array:
        return w.copy()

    def _log_abs_det(self, x: Array) -> Array:
        return np.zeros(x.shape[0])


class AffineLinear(Diffeomorphism):
    """φ(x) = A x + b for an invertible matrix A."""

    name = "affine"

    def __init__(self, matrix: ArrayLike, offset: ArrayLike | None = None) -> None:
        """
        Initialize affine map.

        Args:
            matrix: Invertible d×d matrix A
            offset: Optional translation b (defaults to 0)
        """
        a = np.asarray(matrix, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ConfigError(f"affine matrix must be square, got {a.shape}")
        sign, logdet = np.linalg.slogdet(a)
        if sign == 0:
            raise ConfigError("affine matrix is singular")
        super().__init__(dim=a.shape[0])
        self.matrix = a
        self.matrix_inv = np.linalg.inv(a)
        self.offset = (
            np.zeros(self.dim) if offset is None else np.asarray(offset, dtype=np.float64)
        )
        self._logdet = float(logdet)

    def _forward(self, x: Array) -> Array:
        return x @ self.matrix.T + self.offset

    def _inverse(self, y: Array) -> Array:
        return (y - self.offset) @ self.matrix_inv.T

    def _jvp(self, x: Array, v: Array) -> Array:
        return v @ self.matrix.T

    def _inverse_jvp(self, y: Array, w: Array) -> Array:
        return w @ self.matrix_inv.T

    def _log_abs_det(self, x: Array) -> Array:
        return np.full(x.shape[0], self._logdet)
