"""
Base diffeomorphism interface.

Every geometric operation in isoflow consumes a ``Diffeomorphism``: an invertible map
φ: R^d → R^d with its differential, the differential of its inverse and log|det Dφ|.
Concrete variants implement the batched ``_forward``/``_inverse``/... hooks; the public
methods validate inputs and handle single points versus (n, d) batches.
"""

from abc import ABC, abstractmethod

import numpy as np
from numpy.typing import ArrayLike, NDArray

from isoflow.errors import DomainError, OutOfImageError, ShapeError

Array = NDArray[np.float64]

# Point / TangentVector: float64 arrays of shape (d,) or batches of shape (n, d)
Point = Array
TangentVector = Array


def as_batch(a: ArrayLike, dim: int) -> tuple[Array, bool]:
    """
    Coerce a point or a batch of points to a 2D float64 array.

    Args:
        a: Array of shape (d,) or (n, d)
        dim: Expected ambient dimension

    Returns:
        Tuple of (2D array, whether the input was a single point)
    """
    arr = np.asarray(a, dtype=np.float64)
    single = arr.ndim == 1
    batch = arr[None, :] if single else arr
    if batch.ndim != 2 or batch.shape[1] != dim:
        raise ShapeError(
            f"expected shape ({dim},) or (n, {dim}), got {arr.shape}",
            expected_dim=dim,
            shape=list(arr.shape),
        )
    return batch, single


class Diffeomorphism(ABC):
    """Base class for all diffeomorphisms R^d → R^d."""

    name = "diffeomorphism"

    def __init__(self, dim: int, shape: tuple[int, int, int] | None = None) -> None:
        """
        Initialize with the ambient dimension.

        Args:
            dim: Ambient dimension d
            shape: Optional (c, h, w) image shape tag with c*h*w == d
        """
        if shape is not None and int(np.prod(shape)) != dim:
            raise ShapeError(f"shape tag {shape} does not match dimension {dim}")
        self.dim = dim
        self.shape = shape

    # ------------------------------------------------------------------ hooks

    @abstractmethod
    def _forward(self, x: Array) -> Array:
        """φ on an (n, d) batch."""

    @abstractmethod
    def _inverse(self, y: Array) -> Array:
        """φ^{-1} on an (n, d) batch of points inside the image."""

    @abstractmethod
    def _jvp(self, x: Array, v: Array) -> Array:
        """D_x φ[v] row-wise."""

    @abstractmethod
    def _inverse_jvp(self, y: Array, w: Array) -> Array:
        """D_y φ^{-1}[w] row-wise."""

    @abstractmethod
    def _log_abs_det(self, x: Array) -> Array:
        """log|det D_x φ| per row, shape (n,)."""

    def _contains(self, y: Array) -> NDArray[np.bool_]:
        """Mask of rows lying in the image of φ (default: all of R^d)."""
        return np.ones(y.shape[0], dtype=bool)

    # ----------------------------------------------------------------- public

    def _checked(self, a: ArrayLike) -> tuple[Array, bool]:
        batch, single = as_batch(a, self.dim)
        if not np.all(np.isfinite(batch)):
            bad = np.flatnonzero(~np.all(np.isfinite(batch), axis=1)).tolist()
            raise DomainError("non-finite input", indices=bad, diffeo=self.name)
        return batch, single

    def _checked_image(self, a: ArrayLike) -> tuple[Array, bool]:
        batch, single = self._checked(a)
        inside = self._contains(batch)
        if not np.all(inside):
            raise OutOfImageError(
                f"point outside the image of {self.name}",
                indices=np.flatnonzero(~inside).tolist(),
                diffeo=self.name,
            )
        return batch, single

    def contains(self, y: ArrayLike) -> NDArray[np.bool_] | bool:
        """
        Check whether latent points lie in the image of φ.

        Args:
            y: Point (d,) or batch (n, d)

        Returns:
            Boolean (single point) or boolean mask (batch); non-finite rows are outside
        """
        batch, single = as_batch(y, self.dim)
        finite = np.all(np.isfinite(batch), axis=1)
        mask = np.zeros(batch.shape[0], dtype=bool)
        if np.any(finite):
            mask[finite] = self._contains(batch[finite])
        return bool(mask[0]) if single else mask

    def forward(self, x: ArrayLike) -> Array:
        """
        Evaluate φ(x).

        Args:
            x: Point (d,) or batch (n, d)

        Returns:
            φ(x) with the same shape as x
        """
        batch, single = self._checked(x)
        out = self._forward(batch)
        return out[0] if single else out

    def inverse(self, y: ArrayLike) -> Array:
        """
        Evaluate φ^{-1}(y).

        Args:
            y: Latent point (d,) or batch (n, d) inside the image of φ

        Returns:
            φ^{-1}(y) with the same shape as y
        """
        batch, single = self._checked_image(y)
        out = self._inverse(batch)
        return out[0] if single else out

    def jvp(self, x: ArrayLike, v: ArrayLike) -> Array:
        """
        Evaluate the differential D_x φ[v].

        Args:
            x: Point (d,) or batch (n, d)
            v: Tangent vector(s); a single x may be paired with a batch of directions

        Returns:
            Pushed-forward tangent vector(s)
        """
        xb, x_single = self._checked(x)
        vb, v_single = self._checked(v)
        xb, vb = np.broadcast_arrays(xb, vb)
        out = self._jvp(np.ascontiguousarray(xb), np.ascontiguousarray(vb))
        return out[0] if (x_single and v_single) else out

    def inverse_jvp(self, y: ArrayLike, w: ArrayLike) -> Array:
        """
        Evaluate the differential of the inverse, D_y φ^{-1}[w].

        Args:
            y: Latent point (d,) or batch (n, d) inside the image of φ
            w: Latent tangent vector(s)

        Returns:
            Pulled-back tangent vector(s)
        """
        yb, y_single = self._checked_image(y)
        wb, w_single = self._checked(w)
        yb, wb = np.broadcast_arrays(yb, wb)
        out = self._inverse_jvp(np.ascontiguousarray(yb), np.ascontiguousarray(wb))
        return out[0] if (y_single and w_single) else out

    def log_abs_det(self, x: ArrayLike) -> float | Array:
        """
        Evaluate log|det D_x φ|.

        Args:
            x: Point (d,) or batch (n, d)

        Returns:
            Scalar for a single point, (n,) array for a batch
        """
        batch, single = self._checked(x)
        out = self._log_abs_det(batch)
        return float(out[0]) if single else out

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(dim={self.dim})"
