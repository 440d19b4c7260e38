"""
Learnable tanh-polynomial activations σ(x) = Σ_{k=1..N} a_k tanh(x)^k.

Coefficients are stored per activation site as an (S, N) array where S is the size of axis 1
of the activated tensor: one row per node for vector data, one row per channel for images
(shared across height and width).
"""

import numpy as np
from numpy.typing import ArrayLike

from isoflow.diffeo.base import Array


def _broadcast(a: Array, ndim: int) -> Array:
    # (S, N) -> (S, 1, ..., 1, N) so that it broadcasts against x[..., None] of shape (n, S, ..., 1)
    if a.ndim == 1:
        return a
    return a.reshape((a.shape[0],) + (1,) * (ndim - 2) + (a.shape[1],))


def _powers(t: Array, start: int, order: int) -> Array:
    return t[..., None] ** np.arange(start, start + order)


def tanh_poly(a: ArrayLike, x: ArrayLike) -> Array:
    """
    Evaluate Σ a_k tanh(x)^k.

    Args:
        a: Coefficients (N,) shared by every entry, or (S, N) per site along axis 1 of x
        x: Pre-activations

    Returns:
        Activations with the shape of x
    """
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    t = np.tanh(x)
    return np.sum(_powers(t, 1, a.shape[-1]) * _broadcast(a, x.ndim), axis=-1)


def tanh_poly_derivative(a: ArrayLike, x: ArrayLike) -> Array:
    """Analytic derivative Σ k a_k tanh(x)^{k−1} sech²(x)."""
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    t = np.tanh(x)
    order = a.shape[-1]
    weighted = _broadcast(a, x.ndim) * np.arange(1, order + 1)
    return np.sum(_powers(t, 0, order) * weighted, axis=-1) * (1.0 - t**2)


def tanh_poly_coefficient_grad(x: Array, g: Array, order: int) -> Array:
    """
    Gradient of Σ g ⊙ σ(x) with respect to per-site coefficients.

    Args:
        x: Pre-activations of shape (n, S, ...)
        g: Upstream gradient with the shape of x
        order: Activation order N

    Returns:
        (S, N) coefficient gradient summed over batch and spatial axes
    """
    powers = _powers(np.tanh(x), 1, order)
    reduce_axes = (0,) + tuple(range(2, x.ndim))
    return np.sum(g[..., None] * powers, axis=reduce_axes)
