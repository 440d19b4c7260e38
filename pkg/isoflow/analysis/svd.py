"""
Thin singular value decomposition by one-sided (Hestenes) Jacobi rotations.

Columns of a tall working matrix are rotated pairwise until mutually orthogonal; their norms
are the singular values. Wide inputs are handled by decomposing the transpose.
"""

import numpy as np
from numpy.typing import ArrayLike

from isoflow.diffeo.base import Array
from isoflow.errors import DomainError
from isoflow.utils.logging import get_logger

logger = get_logger(__name__)

MAX_SWEEPS = 60
TOL = 1e-15


def _complete_basis(u: Array, keep: int) -> Array:
    # Replace columns keep.. of u by an orthonormal completion of its first `keep` columns
    m, n = u.shape
    q, r = np.linalg.qr(np.hstack([u[:, :keep], np.eye(m)]))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    out = u.copy()
    out[:, keep:] = q[:, keep:n]
    return out


def _jacobi_tall(b: Array) -> tuple[Array, Array, Array]:
    m, n = b.shape
    b = b.copy()
    v = np.eye(n)
    for sweep in range(MAX_SWEEPS):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = b[:, i] @ b[:, i]
                beta = b[:, j] @ b[:, j]
                gamma = b[:, i] @ b[:, j]
                if gamma == 0.0 or abs(gamma) <= TOL * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                bi, bj = b[:, i].copy(), b[:, j]
                b[:, i] = c * bi - s * bj
                b[:, j] = s * bi + c * bj
                vi, vj = v[:, i].copy(), v[:, j]
                v[:, i] = c * vi - s * vj
                v[:, j] = s * vi + c * vj
        if not rotated:
            logger.debug("svd_converged", sweeps=sweep + 1, shape=[m, n])
            break
    else:
        logger.warning("svd_max_sweeps", sweeps=MAX_SWEEPS, shape=[m, n])

    sigma = np.linalg.norm(b, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, b, v = sigma[order], b[:, order], v[:, order]
    cutoff = TOL * max(float(sigma[0]) if n else 0.0, 1.0) * max(m, n)
    keep = int(np.sum(sigma > cutoff))
    u = np.zeros((m, n))
    u[:, :keep] = b[:, :keep] / sigma[:keep]
    if keep < n:
        u = _complete_basis(u, keep)
    return u, sigma, v


def svd(a: ArrayLike) -> tuple[Array, Array, Array]:
    """
    Thin SVD A = U diag(Σ) Vᵀ.

    Args:
        a: (m, n) finite matrix

    Returns:
        Tuple of U (m, k), Σ (k,) nonincreasing and nonnegative, V (n, k), with k = min(m, n)
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DomainError(f"svd expects a 2D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("svd input has non-finite entries")
    if a.shape[0] >= a.shape[1]:
        return _jacobi_tall(a)
    v, sigma, u = _jacobi_tall(a.T)
    return u, sigma, v
