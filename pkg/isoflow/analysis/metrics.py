"""
Evaluation metrics: low-rank and geodesic relative RMSEs, per-point error clouds and the
combined metrics report.
"""

from typing import Any

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from pydantic import BaseModel, Field

from isoflow.analysis.low_rank import RankRResult, map_columns, pca_rank_r, tangent_rank_r
from isoflow.config import settings
from isoflow.diffeo.base import Array, Diffeomorphism, as_batch
from isoflow.errors import ConfigError, DegenerateDenominatorError
from isoflow.geometry import iso, pullback
from isoflow.utils.logging import get_logger

logger = get_logger(__name__)

CLOUD_COLUMNS = ["dist_to_barycentre", "value"]


def _denominator(X: Array, p: Array) -> float:
    den = float(np.sum((X - p) ** 2))
    if den == 0.0:
        raise DegenerateDenominatorError("every data point coincides with the base point")
    return den


def low_rank_rel_rmse(X: ArrayLike, X_approx: ArrayLike, p: ArrayLike) -> float:
    """
    √(Σ‖xⁱ − x̃ⁱ‖² / Σ‖xⁱ − p‖²).

    Args:
        X: (ℓ, d) data
        X_approx: (ℓ, d) reconstructions
        p: Base point (d,)

    Returns:
        Relative RMSE (0 iff perfect reconstruction)
    """
    X = np.asarray(X, dtype=np.float64)
    X_approx = np.asarray(X_approx, dtype=np.float64)
    if X.shape != X_approx.shape:
        raise ConfigError(f"shape mismatch {X.shape} vs {X_approx.shape}")
    den = _denominator(X, np.asarray(p, dtype=np.float64))
    return float(np.sqrt(np.sum((X - X_approx) ** 2) / den))


def geodesic_discrepancies(
    d: Diffeomorphism,
    X: ArrayLike,
    p: ArrayLike,
    m: int | None = None,
    M: int | None = None,
    threads: int | None = None,
) -> Array:
    """
    Per-point RMS gap between the geodesic and the iso-geodesic from p, sampled at k/m.

    Args:
        d: Diffeomorphism φ
        X: (ℓ, d) data
        p: Base point (d,)
        m: Samples per geodesic (defaults to ``settings.geodesic_samples``)
        M: Iso discretization resolution
        threads: Worker bound

    Returns:
        (ℓ,) RMS discrepancies
    """
    X, _ = as_batch(X, d.dim)
    m = settings.geodesic_samples if m is None else int(m)
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")
    ts = np.arange(m + 1) / m

    def per_point(x: Array) -> Array:
        g = iso.discretize_geodesic(d, p, x, M)
        plain = pullback.geodesic(d, p, x, ts)
        isometric = iso.iso_geodesic(d, p, x, ts, discrete=g)
        return np.atleast_1d(np.sqrt(np.mean(np.sum((plain - isometric) ** 2, axis=1))))

    return map_columns(per_point, X, threads)[:, 0]


def geodesic_rel_rmse(
    d: Diffeomorphism,
    X: ArrayLike,
    p: ArrayLike,
    m: int | None = None,
    M: int | None = None,
    threads: int | None = None,
) -> float:
    """
    Relative RMSE between geodesics and iso-geodesics from p to every data point.

    Returns:
        √(mean_i RMSᵢ² / mean_i ‖xⁱ − p‖²); 0 when geodesics already have constant ℓ² speed
    """
    X, _ = as_batch(X, d.dim)
    p = np.asarray(p, dtype=np.float64)
    den = _denominator(X, p)
    gaps = geodesic_discrepancies(d, X, p, m, M, threads)
    return float(np.sqrt(np.sum(gaps**2) / den))


def error_point_clouds(
    d: Diffeomorphism,
    X: ArrayLike,
    p: ArrayLike,
    plain: RankRResult,
    isometric: RankRResult,
    m: int | None = None,
    M: int | None = None,
    threads: int | None = None,
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """
    Per-point error clouds against the distance to the base point.

    The first pairs ‖xⁱ − p‖₂ with the geodesic discrepancy; the second pairs it with the plain
    reconstruction error minus the iso reconstruction error.

    Args:
        d: Diffeomorphism φ
        X: (ℓ, d) data
        p: Base point (d,)
        plain: Plain rank-r result on X
        isometric: Iso rank-r result on X
        m: Samples per geodesic
        M: Iso discretization resolution
        threads: Worker bound

    Returns:
        Two DataFrames with columns ``dist_to_barycentre`` and ``value``
    """
    X, _ = as_batch(X, d.dim)
    p = np.asarray(p, dtype=np.float64)
    dist = np.linalg.norm(X - p, axis=1)
    gaps = geodesic_discrepancies(d, X, p, m, M, threads)
    gain = np.linalg.norm(X - plain.reconstructions, axis=1) - np.linalg.norm(
        X - isometric.reconstructions, axis=1
    )
    return (
        pd.DataFrame({"dist_to_barycentre": dist, "value": gaps}),
        pd.DataFrame({"dist_to_barycentre": dist, "value": gain}),
    )


class MetricsReport(BaseModel):
    """All evaluation metrics for one data set under one diffeomorphism."""

    diffeo: str = Field(description="Diffeomorphism name")
    rank: int = Field(description="Approximation rank r")
    geodesic_samples: int = Field(description="Samples m per geodesic")
    resolution: int = Field(description="Iso discretization M")
    points: int = Field(description="Number of data points ℓ")
    base_point: list[float] = Field(description="Base point p")
    low_rank_rel_rmse_plain: float = Field(ge=0.0)
    low_rank_rel_rmse_iso: float = Field(ge=0.0)
    linear_low_rank_rel_rmse: float = Field(ge=0.0)
    geodesic_rel_rmse: float = Field(ge=0.0)
    tangent_error_plain: float = Field(ge=0.0)
    tangent_error_iso: float = Field(ge=0.0)
    global_error_plain: float = Field(ge=0.0)
    global_error_iso: float = Field(ge=0.0)
    geodesic_cloud: list[tuple[float, float]] = Field(default_factory=list)
    reconstruction_cloud: list[tuple[float, float]] = Field(default_factory=list)

    def cloud_frames(self) -> tuple[pd.DataFrame, pd.DataFrame]:
        """Point clouds as DataFrames (CSV header dist_to_barycentre,value)."""
        return (
            pd.DataFrame(self.geodesic_cloud, columns=CLOUD_COLUMNS),
            pd.DataFrame(self.reconstruction_cloud, columns=CLOUD_COLUMNS),
        )

    def headline(self) -> dict[str, Any]:
        return self.model_dump(exclude={"geodesic_cloud", "reconstruction_cloud"})


def build_metrics_report(
    d: Diffeomorphism,
    X: ArrayLike,
    p: ArrayLike | None = None,
    r: int = 1,
    m: int | None = None,
    M: int | None = None,
    threads: int | None = None,
) -> tuple[MetricsReport, RankRResult, RankRResult]:
    """
    Run both rank-r variants, the linear baseline, the geodesic rel-RMSE and the point clouds.

    Args:
        d: Diffeomorphism φ
        X: (ℓ, d) data
        p: Base point (defaults to the Riemannian barycentre)
        r: Approximation rank
        m: Samples per geodesic
        M: Iso discretization resolution
        threads: Worker bound

    Returns:
        Tuple of (report, plain result, iso result)
    """
    X, _ = as_batch(X, d.dim)
    p = pullback.barycentre(d, X) if p is None else np.asarray(p, dtype=np.float64)
    m = settings.geodesic_samples if m is None else int(m)
    M = settings.resolution if M is None else int(M)
    logger.info("metrics_started", diffeo=d.name, points=len(X), rank=r, m=m, M=M)

    plain = tangent_rank_r(d, X, p, r, "plain", M, threads)
    isometric = tangent_rank_r(d, X, p, r, "iso", M, threads)
    linear = pca_rank_r(X, p, r)
    geo_cloud, rec_cloud = error_point_clouds(d, X, p, plain, isometric, m, M, threads)
    den = _denominator(X, p)

    report = MetricsReport(
        diffeo=d.name,
        rank=r,
        geodesic_samples=m,
        resolution=M,
        points=len(X),
        base_point=p.tolist(),
        low_rank_rel_rmse_plain=low_rank_rel_rmse(X, plain.reconstructions, p),
        low_rank_rel_rmse_iso=low_rank_rel_rmse(X, isometric.reconstructions, p),
        linear_low_rank_rel_rmse=low_rank_rel_rmse(X, linear.reconstructions, p),
        geodesic_rel_rmse=float(np.sqrt(np.sum(geo_cloud["value"].to_numpy() ** 2) / den)),
        tangent_error_plain=plain.tangent_error,
        tangent_error_iso=isometric.tangent_error,
        global_error_plain=plain.global_error,
        global_error_iso=isometric.global_error,
        geodesic_cloud=list(geo_cloud.itertuples(index=False, name=None)),
        reconstruction_cloud=list(rec_cloud.itertuples(index=False, name=None)),
    )
    logger.info("metrics_complete", **report.headline())
    return report, plain, isometric
