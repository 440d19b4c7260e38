"""
Normalizing-flow loss with weight decay.

−log p_θ(x) = (d/2) log 2π + ½‖φ_θ(x)‖² − log|det D_xφ_θ|, averaged over a batch, plus
(λ/2)‖θ‖².
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from isoflow.diffeo.base import Array, Diffeomorphism, as_batch
from isoflow.errors import ShapeError
from isoflow.flows.model import FlowModel

LOG_2PI = float(np.log(2.0 * np.pi))


def nll(model: Diffeomorphism, x: ArrayLike) -> float | Array:
    """
    Negative log-likelihood under a standard normal latent density.

    Args:
        model: Any diffeomorphism
        x: Point (d,) or batch (n, d)

    Returns:
        Scalar for a single point, (n,) array for a batch
    """
    xb, single = as_batch(x, model.dim)
    z = model.forward(xb)
    logdet = np.asarray(model.log_abs_det(xb))
    out = 0.5 * model.dim * LOG_2PI + 0.5 * np.sum(z**2, axis=1) - logdet
    return float(out[0]) if single else out


@dataclass(frozen=True)
class LossTerms:
    """Loss decomposition for one batch."""

    nll: float
    weight_decay: float

    @property
    def total(self) -> float:
        return self.nll + self.weight_decay


def loss_terms_and_grad(
    model: FlowModel, batch: ArrayLike, weight_decay: float
) -> tuple[LossTerms, Array]:
    """
    Mean batch NLL, decay term and the gradient of their sum over θ.

    Args:
        model: Flow model
        batch: (n, d) nonempty batch
        weight_decay: λ

    Returns:
        Tuple of (loss terms, flat gradient)
    """
    xb, _ = as_batch(batch, model.dim)
    n = xb.shape[0]
    if n == 0:
        raise ShapeError("loss needs a nonempty batch")
    z, caches = model.forward_with_caches(xb)
    logdet = model.logdet()
    mean_nll = 0.5 * model.dim * LOG_2PI + 0.5 * float(np.sum(z**2)) / n - logdet

    grad, _ = model.backward_from_caches(caches, z / n, -1.0)
    theta = model.params.values
    grad += weight_decay * theta
    decay = 0.5 * weight_decay * float(theta @ theta)
    return LossTerms(nll=mean_nll, weight_decay=decay), grad


def loss_and_grad(
    model: FlowModel, batch: ArrayLike, weight_decay: float
) -> tuple[float, Array]:
    """
    Batch loss mean NLL + (λ/2)‖θ‖² and its gradient.

    Args:
        model: Flow model
        batch: (n, d) nonempty batch
        weight_decay: λ

    Returns:
        Tuple of (loss, flat gradient over the ParamVector)
    """
    terms, grad = loss_terms_and_grad(model, batch, weight_decay)
    return terms.total, grad
