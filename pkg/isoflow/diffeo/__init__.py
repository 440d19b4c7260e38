"""Diffeomorphisms φ: R^d → R^d consumed by the geometry modules."""

from isoflow.diffeo.base import Array, Diffeomorphism, Point, TangentVector, as_batch
from isoflow.diffeo.linear import AffineLinear, Identity
from isoflow.diffeo.modeled import ModeledDoubleGaussian
from isoflow.diffeo.registry import DiffeoRegistry, get_diffeo

__all__ = [
    "AffineLinear",
    "Array",
    "DiffeoRegistry",
    "Diffeomorphism",
    "Identity",
    "ModeledDoubleGaussian",
    "Point",
    "TangentVector",
    "as_batch",
    "get_diffeo",
]
