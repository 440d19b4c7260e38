"""
Tangent-space rank-r approximation of a data set about a base point.

The data are mapped to the tangent space at p with the (iso-)logarithm, the tangent matrix is
truncated to rank r by SVD and the truncated columns are mapped back with the matching
(iso-)exponential. Data matrices hold one point per row; the tangent matrix is d×ℓ.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Literal

import numpy as np
from numpy.typing import ArrayLike

from isoflow.analysis.svd import svd
from isoflow.diffeo.base import Array, Diffeomorphism, as_batch
from isoflow.diffeo.linear import Identity
from isoflow.errors import ColumnError, ConfigError, IsoflowError
from isoflow.geometry import iso, pullback
from isoflow.utils.logging import get_logger
from isoflow.utils.parallel import ordered_map

logger = get_logger(__name__)

Variant = Literal["plain", "iso", "linear"]


@dataclass(frozen=True)
class RankRResult:
    """Output of a tangent-space rank-r approximation."""

    variant: Variant
    rank: int
    base_point: Array
    tangent: Array = field(repr=False)
    U: Array = field(repr=False)
    singular_values: Array = field(repr=False)
    V: Array = field(repr=False)
    truncated: Array = field(repr=False)
    reconstructions: Array = field(repr=False)
    tangent_error: float
    global_error: float

    def summary(self) -> dict[str, Any]:
        return {
            "variant": self.variant,
            "rank": self.rank,
            "points": int(self.reconstructions.shape[0]),
            "singular_values": self.singular_values.tolist(),
            "tangent_error": self.tangent_error,
            "global_error": self.global_error,
        }


def map_columns(
    func: Callable[[Array], Array], rows: Array, threads: int | None = None
) -> Array:
    """
    Apply a per-point map to every row, collecting failures by index.

    Args:
        func: Map from a (d,) vector to a (d,) vector
        rows: (ℓ, d) matrix
        threads: Worker bound (defaults to ``settings.threads``)

    Returns:
        (ℓ, d) matrix of results

    Raises:
        ColumnError: If any row fails; maps row index to the failure message
    """

    def guarded(row: Array) -> Array | IsoflowError:
        try:
            return func(row)
        except IsoflowError as e:
            return e

    results = ordered_map(guarded, list(rows), threads)
    failures = {i: str(r) for i, r in enumerate(results) if isinstance(r, IsoflowError)}
    if failures:
        raise ColumnError(f"{len(failures)} of {len(rows)} columns failed", failures=failures)
    return np.vstack(results) if results else np.zeros((0, rows.shape[1]))


def tangent_vectors(
    d: Diffeomorphism,
    X: Array,
    p: Array,
    variant: Variant,
    M: int | None = None,
    threads: int | None = None,
) -> Array:
    """
    (Iso-)logarithms of every data point at p, one per row.

    Args:
        d: Diffeomorphism φ
        X: (ℓ, d) data matrix
        p: Base point (d,)
        variant: ``plain`` (log) or ``iso`` (iso_log)
        M: Iso discretization resolution
        threads: Worker bound

    Returns:
        (ℓ, d) matrix
    """
    if variant == "iso":
        return map_columns(lambda x: iso.iso_log(d, p, x, M), X, threads)
    try:
        return pullback.log(d, p, X)
    except IsoflowError:
        return map_columns(lambda x: pullback.log(d, p, x), X, threads)


def reconstruct(
    d: Diffeomorphism,
    xi: Array,
    p: Array,
    variant: Variant,
    M: int | None = None,
    threads: int | None = None,
) -> Array:
    """
    (Iso-)exponentials of tangent vectors at p.

    Args:
        d: Diffeomorphism φ
        xi: (ℓ, d) tangent vectors, one per row
        p: Base point (d,)
        variant: ``plain`` (exp) or ``iso`` (iso_exp)
        M: Iso discretization resolution
        threads: Worker bound

    Returns:
        (ℓ, d) reconstructions
    """
    if variant == "iso":
        return map_columns(lambda v: iso.iso_exp(d, p, v, M)[0], xi, threads)
    try:
        return pullback.exp(d, p, xi)
    except IsoflowError:
        return map_columns(lambda v: pullback.exp(d, p, v), xi, threads)


def truncate(tangent: Array, r: int) -> tuple[Array, Array, Array, Array]:
    """
    Best rank-r approximation of a d×ℓ matrix.

    Returns:
        Tuple of (U, Σ, V, U_r Σ_r V_rᵀ)
    """
    U, S, V = svd(tangent)
    xi = (U[:, :r] * S[:r]) @ V[:, :r].T
    return U, S, V, xi


def tangent_rank_r(
    d: Diffeomorphism,
    X: ArrayLike,
    p: ArrayLike,
    r: int,
    variant: Variant = "plain",
    M: int | None = None,
    threads: int | None = None,
) -> RankRResult:
    """
    Rank-r approximation of data in the tangent space at p.

    The plain variant uses log/exp; the iso variant uses iso_log/iso_exp.

    Args:
        d: Diffeomorphism φ
        X: (ℓ, d) data matrix
        p: Base point (d,)
        r: Target rank, 1 ≤ r ≤ min(d, ℓ)
        variant: ``plain`` or ``iso``
        M: Iso discretization resolution
        threads: Worker bound for per-column work

    Returns:
        RankRResult

    Raises:
        ColumnError: If logarithms or exponentials fail for some columns
    """
    X, _ = as_batch(X, d.dim)
    p = np.asarray(p, dtype=np.float64)
    ell = X.shape[0]
    if not 1 <= r <= min(d.dim, ell):
        raise ConfigError(f"rank must satisfy 1 <= r <= min(d, l) = {min(d.dim, ell)}, got {r}")
    log_variant: Variant = "iso" if variant == "iso" else "plain"

    tangent = tangent_vectors(d, X, p, log_variant, M, threads).T
    U, S, V, xi = truncate(tangent, r)
    recon = reconstruct(d, xi.T, p, log_variant, M, threads)
    result = RankRResult(
        variant=variant,
        rank=r,
        base_point=p,
        tangent=tangent,
        U=U,
        singular_values=S,
        V=V,
        truncated=xi,
        reconstructions=recon,
        tangent_error=float(np.linalg.norm(tangent - xi)),
        global_error=float(np.sum((X - recon) ** 2)),
    )
    logger.info(
        "rank_r_complete",
        variant=variant,
        rank=r,
        points=ell,
        tangent_error=result.tangent_error,
        global_error=result.global_error,
    )
    return result


def pca_rank_r(X: ArrayLike, p: ArrayLike, r: int) -> RankRResult:
    """Euclidean rank-r approximation about p (linear baseline)."""
    X = np.asarray(X, dtype=np.float64)
    result = tangent_rank_r(Identity(X.shape[1]), X, p, r, variant="plain")
    return replace(result, variant="linear")
