"""
Closed-form Riemannian mappings of the pullback metric (u, v)^φ_x = (D_xφ[u], D_xφ[v])₂.

Geodesics are straight lines in latent space mapped back through φ^{-1}; every mapping below
is one batched evaluation of φ, φ^{-1} and their differentials.
"""

import numpy as np
from numpy.typing import ArrayLike

from isoflow.diffeo.base import Array, Diffeomorphism, Point, TangentVector


def inner(d: Diffeomorphism, x: ArrayLike, u: ArrayLike, v: ArrayLike) -> float | Array:
    """
    Pullback inner product (D_xφ[u], D_xφ[v])₂.

    Args:
        d: Diffeomorphism φ
        x: Base point (d,)
        u: Tangent vector(s)
        v: Tangent vector(s)

    Returns:
        Scalar, or one value per row for batched tangent vectors
    """
    du = d.jvp(x, u)
    dv = d.jvp(x, v)
    out = np.sum(du * dv, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def norm(d: Diffeomorphism, x: ArrayLike, v: ArrayLike) -> float | Array:
    """Pullback norm ‖v‖^φ_x = ‖D_xφ[v]‖₂."""
    out = np.linalg.norm(d.jvp(x, v), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def metric_tensor(d: Diffeomorphism, x: ArrayLike) -> Array:
    """
    Gram matrix G_x = J^T J with J = D_xφ in the standard basis.

    Args:
        d: Diffeomorphism φ
        x: Base point (d,)

    Returns:
        (d, d) symmetric positive definite matrix
    """
    columns = d.jvp(x, np.eye(d.dim))
    return columns @ columns.T


def geodesic(d: Diffeomorphism, x: ArrayLike, y: ArrayLike, t: ArrayLike) -> Point:
    """
    γ_{x,y}(t) = φ^{-1}((1 − t) φ(x) + t φ(y)).

    Args:
        d: Diffeomorphism φ
        x: Start point (d,)
        y: End point (d,)
        t: Scalar parameter or array of parameters (values outside [0, 1] extend the curve)

    Returns:
        (d,) for scalar t, (len(t), d) otherwise

    Raises:
        OutOfImageError: If a latent point leaves the image of φ
    """
    zx, zy = d.forward(np.stack([np.asarray(x, float), np.asarray(y, float)]))
    ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    latent = (1.0 - ts)[:, None] * zx + ts[:, None] * zy
    out = d.inverse(latent)
    return out[0] if np.ndim(t) == 0 else out


def exp(d: Diffeomorphism, x: ArrayLike, v: ArrayLike) -> Point:
    """
    exp_x(v) = φ^{-1}(φ(x) + D_xφ[v]).

    Args:
        d: Diffeomorphism φ
        x: Base point (d,)
        v: Tangent vector (d,) or batch (n, d)

    Returns:
        Point(s) with the shape of v
    """
    return d.inverse(d.forward(x) + d.jvp(x, v))


def log(d: Diffeomorphism, x: ArrayLike, y: ArrayLike) -> TangentVector:
    """
    log_x(y) = D_{φ(x)}φ^{-1}[φ(y) − φ(x)].

    Args:
        d: Diffeomorphism φ
        x: Base point (d,)
        y: Target point (d,) or batch (n, d)

    Returns:
        Tangent vector(s) with the shape of y
    """
    zx = d.forward(x)
    return d.inverse_jvp(zx, d.forward(y) - zx)


def distance(d: Diffeomorphism, x: ArrayLike, y: ArrayLike) -> float | Array:
    """Geodesic distance ‖φ(x) − φ(y)‖₂ (broadcasts over batches)."""
    out = np.linalg.norm(d.forward(x) - d.forward(y), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def parallel_transport(
    d: Diffeomorphism, x: ArrayLike, y: ArrayLike, v: ArrayLike
) -> TangentVector:
    """
    P_{y←x}(v) = D_{φ(y)}φ^{-1}[D_xφ[v]].

    Args:
        d: Diffeomorphism φ
        x: Source base point (d,)
        y: Target base point (d,)
        v: Tangent vector(s) at x

    Returns:
        Tangent vector(s) at y
    """
    return d.inverse_jvp(d.forward(y), d.jvp(x, v))


def barycentre(d: Diffeomorphism, points: ArrayLike) -> Point:
    """
    Riemannian barycentre φ^{-1}((1/ℓ) Σ φ(x^i)).

    Args:
        d: Diffeomorphism φ
        points: (ℓ, d) data matrix (rows are points), ℓ ≥ 1

    Returns:
        (d,) minimizer of Σ_i d^φ(·, x^i)²
    """
    latent = np.atleast_2d(d.forward(points))
    return d.inverse(latent.mean(axis=0))


def linear_interpolation(x: ArrayLike, y: ArrayLike, t: ArrayLike) -> Point:
    """Euclidean baseline (1 − t) x + t y; array t gives one row per value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    ts = np.asarray(t, dtype=np.float64)
    if ts.ndim == 0:
        return (1.0 - ts) * x + ts * y
    return (1.0 - ts)[:, None] * x + ts[:, None] * y
