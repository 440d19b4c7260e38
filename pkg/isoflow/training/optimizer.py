"""
Adam optimizer over a flat parameter vector.
"""

from dataclasses import dataclass

import numpy as np

from isoflow.diffeo.base import Array
from isoflow.errors import ShapeError


@dataclass
class AdamState:
    """First/second moment accumulators and the step counter."""

    m: Array
    v: Array
    step: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(m=np.zeros(size), v=np.zeros(size), step=0)


def adam_step(
    state: AdamState,
    params: Array,
    grad: Array,
    lr: float = 1e-3,
    betas: tuple[float, float] = (0.9, 0.99),
    eps: float = 1e-8,
) -> tuple[AdamState, Array]:
    """
    One bias-corrected Adam update, applied in place.

    Args:
        state: Moment accumulators (updated in place)
        params: Flat parameters (updated in place)
        grad: Gradient with the shape of params
        lr: Step size
        betas: Decay rates (β₁, β₂)
        eps: Denominator offset

    Returns:
        Tuple of (state, params)
    """
    if grad.shape != params.shape or state.m.shape != params.shape:
        raise ShapeError(
            f"Adam shapes differ: params {params.shape}, grad {grad.shape}, state {state.m.shape}"
        )
    beta1, beta2 = betas
    state.step += 1
    state.m *= beta1
    state.m += (1.0 - beta1) * grad
    state.v *= beta2
    state.v += (1.0 - beta2) * grad**2

    m_hat = state.m / (1.0 - beta1**state.step)
    v_hat = state.v / (1.0 - beta2**state.step)
    params -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return state, params
