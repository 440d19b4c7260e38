"""Rank-r approximation, evaluation metrics and diagnostics."""

from isoflow.analysis.diagnostics import MMatrixDiagnostic, m_matrix_diagnostic
from isoflow.analysis.low_rank import RankRResult, pca_rank_r, tangent_rank_r
from isoflow.analysis.metrics import (
    MetricsReport,
    build_metrics_report,
    error_point_clouds,
    geodesic_discrepancies,
    geodesic_rel_rmse,
    low_rank_rel_rmse,
)
from isoflow.analysis.svd import svd

__all__ = [
    "MMatrixDiagnostic",
    "MetricsReport",
    "RankRResult",
    "build_metrics_report",
    "error_point_clouds",
    "geodesic_discrepancies",
    "geodesic_rel_rmse",
    "low_rank_rel_rmse",
    "m_matrix_diagnostic",
    "pca_rank_r",
    "svd",
    "tangent_rank_r",
]
