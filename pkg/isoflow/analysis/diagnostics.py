"""
Second-order diagnostic of the global approximation error.

For each data point the matrix Mⁱ = JᵀJ with J the differential of w ↦ exp_p(ρ_p(w)) at
ρ_p^{-1}(log_p xⁱ) measures how far the composite map is from an isometry (Mⁱ = I).
"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from isoflow.config import settings
from isoflow.diffeo.base import Array, Diffeomorphism, as_batch
from isoflow.errors import ColumnError, ConfigError, IsoflowError
from isoflow.geometry import pullback
from isoflow.geometry.iso import RHO_TRANSFORMS
from isoflow.utils.logging import get_logger
from isoflow.utils.parallel import ordered_map

logger = get_logger(__name__)


@dataclass(frozen=True)
class MMatrixDiagnostic:
    """Per-point Gram matrices and their deviation from the identity."""

    variant: Literal["plain", "iso"]
    fd_step: float
    matrices: Array = field(repr=False)
    deviations: Array = field(repr=False)

    def summary(self) -> dict[str, float | str]:
        return {
            "variant": self.variant,
            "fd_step": self.fd_step,
            "max_deviation": float(self.deviations.max()) if self.deviations.size else 0.0,
            "mean_deviation": float(self.deviations.mean()) if self.deviations.size else 0.0,
        }


def m_matrix_diagnostic(
    d: Diffeomorphism,
    X: ArrayLike,
    p: ArrayLike,
    variant: Literal["plain", "iso"] = "plain",
    M: int | None = None,
    fd_step: float | None = None,
    threads: int | None = None,
) -> MMatrixDiagnostic:
    """
    Central-difference Gram matrices of exp_p ∘ ρ_p at ρ_p^{-1}(log_p xⁱ).

    Args:
        d: Diffeomorphism φ
        X: (ℓ, d) data
        p: Base point (d,)
        variant: ``plain`` (ρ = id) or ``iso``
        M: Iso discretization resolution
        fd_step: Finite-difference step (defaults to ``settings.fd_step``)
        threads: Worker bound

    Returns:
        MMatrixDiagnostic

    Raises:
        ColumnError: If evaluation fails for some points (e.g. leaving the image of φ)
    """
    X, _ = as_batch(X, d.dim)
    p = np.asarray(p, dtype=np.float64)
    h = settings.fd_step if fd_step is None else float(fd_step)
    if h <= 0.0:
        raise ConfigError(f"fd_step must be positive, got {h}")
    rho, rho_inverse = RHO_TRANSFORMS[variant]
    basis = np.eye(d.dim)

    def composite(w: Array) -> Array:
        if variant == "plain":
            return pullback.exp(d, p, w)
        return np.vstack([pullback.exp(d, p, rho(d, p, row, M)) for row in w])

    def per_point(x: Array) -> Array | IsoflowError:
        try:
            w0 = rho_inverse(d, p, pullback.log(d, p, x), M)
            plus = composite(w0 + h * basis)
            minus = composite(w0 - h * basis)
            jac = ((plus - minus) / (2.0 * h)).T
            return jac.T @ jac
        except IsoflowError as e:
            return e

    results = ordered_map(per_point, list(X), threads)
    failures = {i: str(r) for i, r in enumerate(results) if isinstance(r, IsoflowError)}
    if failures:
        raise ColumnError(
            f"M-matrix evaluation failed for {len(failures)} points", failures=failures
        )
    matrices = np.stack(results)  # type: ignore[arg-type]
    deviations = np.linalg.norm(matrices - basis, axis=(1, 2))
    diagnostic = MMatrixDiagnostic(
        variant=variant, fd_step=h, matrices=matrices, deviations=deviations
    )
    logger.info("m_matrix_complete", points=len(X), **diagnostic.summary())
    return diagnostic
