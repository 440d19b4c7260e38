"""
Closed-form diffeomorphism for the bimodal Gaussian illustration.

φ(x) = ψ(R x) with R the 45° rotation and ψ(y) = (y₁ − h(y₂), tanh(y₂ / 2)), where
h(s) = s²/2 + 1/2 for |s| ≤ 1 and |s| otherwise. The image of φ is the strip R × (−1, 1).
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from isoflow.diffeo.base import Array, Diffeomorphism

_SQRT_HALF = 1.0 / np.sqrt(2.0)


def h(s: ArrayLike) -> Array:
    """Piecewise C¹ bend: s²/2 + 1/2 inside [−1, 1], |s| outside."""
    s = np.asarray(s, dtype=np.float64)
    return np.where(np.abs(s) <= 1.0, 0.5 * s**2 + 0.5, np.abs(s))


def h_prime(s: ArrayLike) -> Array:
    """Derivative of ``h``."""
    s = np.asarray(s, dtype=np.float64)
    return np.where(np.abs(s) <= 1.0, s, np.sign(s))


def _log_cosh(a: Array) -> Array:
    return np.logaddexp(a, -a) - np.log(2.0)


class ModeledDoubleGaussian(Diffeomorphism):
    """Modeled pullback diffeomorphism on R² whose geodesics bend between the two modes."""

    name = "modeled"

    ROTATION: NDArray[np.float64] = np.array(
        [[_SQRT_HALF, -_SQRT_HALF], [_SQRT_HALF, _SQRT_HALF]], dtype=np.float64
    )
    SQUASH = 0.5

    def __init__(self) -> None:
        super().__init__(dim=2)

    def _contains(self, y: Array) -> NDArray[np.bool_]:
        return np.abs(y[:, 1]) < 1.0

    def _rotate(self, x: Array) -> Array:
        return x @ self.ROTATION.T

    def _forward(self, x: Array) -> Array:
        y = self._rotate(x)
        return np.stack([y[:, 0] - h(y[:, 1]), np.tanh(self.SQUASH * y[:, 1])], axis=1)

    def _inverse(self, z: Array) -> Array:
        y2 = np.arctanh(z[:, 1]) / self.SQUASH
        y1 = z[:, 0] + h(y2)
        return np.stack([y1, y2], axis=1) @ self.ROTATION

    def _jvp(self, x: Array, v: Array) -> Array:
        y = self._rotate(x)
        dy = self._rotate(v)
        sech2 = 1.0 - np.tanh(self.SQUASH * y[:, 1]) ** 2
        return np.stack(
            [dy[:, 0] - h_prime(y[:, 1]) * dy[:, 1], self.SQUASH * sech2 * dy[:, 1]], axis=1
        )

    def _inverse_jvp(self, z: Array, w: Array) -> Array:
        y2 = np.arctanh(z[:, 1]) / self.SQUASH
        dy2 = w[:, 1] / (self.SQUASH * (1.0 - z[:, 1] ** 2))
        dy1 = w[:, 0] + h_prime(y2) * dy2
        return np.stack([dy1, dy2], axis=1) @ self.ROTATION

    def _log_abs_det(self, x: Array) -> Array:
        # rotation contributes det 1; ψ contributes ½ sech²(y₂/2)
        y2 = self._rotate(x)[:, 1]
        return np.log(self.SQUASH) - 2.0 * _log_cosh(self.SQUASH * y2)
