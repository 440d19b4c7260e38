"""Pullback and iso-Riemannian geometry."""

from isoflow.geometry.iso import (
    DiscreteGeodesic,
    IsoExpTrace,
    discretize_geodesic,
    iso_distance,
    iso_exp,
    iso_geodesic,
    iso_log,
    iso_parallel_transport,
    rho_id,
    rho_id_inverse,
    rho_iso,
    rho_iso_inverse,
    time_change,
)
from isoflow.geometry.pullback import (
    barycentre,
    distance,
    exp,
    geodesic,
    inner,
    linear_interpolation,
    log,
    metric_tensor,
    norm,
    parallel_transport,
)

__all__ = [
    "DiscreteGeodesic",
    "IsoExpTrace",
    "barycentre",
    "discretize_geodesic",
    "distance",
    "exp",
    "geodesic",
    "inner",
    "iso_distance",
    "iso_exp",
    "iso_geodesic",
    "iso_log",
    "iso_parallel_transport",
    "linear_interpolation",
    "log",
    "metric_tensor",
    "norm",
    "parallel_transport",
    "rho_id",
    "rho_id_inverse",
    "rho_iso",
    "rho_iso_inverse",
    "time_change",
]
