"""
Shared fixtures: an analytic quadratic diffeomorphism, reference maps and small flows.
"""

from collections.abc import Callable

import numpy as np
import pytest

from isoflow.diffeo.base import Array, Diffeomorphism
from isoflow.diffeo.linear import AffineLinear, Identity
from isoflow.diffeo.modeled import ModeledDoubleGaussian
from isoflow.flows.config import (
    ConvNetConfig,
    FeedForwardNetConfig,
    FixedFilterNetConfig,
    FlowConfig,
)
from isoflow.flows.model import FlowModel, build_flow


class QuadraticShear(Diffeomorphism):
    """φ(x₁, x₂) = (x₁, x₂ + x₁²) with inverse (y₁, y₂ − y₁²) and unit Jacobian determinant."""

    name = "quadratic"

    def __init__(self) -> None:
        super().__init__(dim=2)

    def _forward(self, x: Array) -> Array:
        return np.stack([x[:, 0], x[:, 1] + x[:, 0] ** 2], axis=1)

    def _inverse(self, y: Array) -> Array:
        return np.stack([y[:, 0], y[:, 1] - y[:, 0] ** 2], axis=1)

    def _jvp(self, x: Array, v: Array) -> Array:
        return np.stack([v[:, 0], v[:, 1] + 2.0 * x[:, 0] * v[:, 0]], axis=1)

    def _inverse_jvp(self, y: Array, w: Array) -> Array:
        return np.stack([w[:, 0], w[:, 1] - 2.0 * y[:, 0] * w[:, 0]], axis=1)

    def _log_abs_det(self, x: Array) -> Array:
        return np.zeros(x.shape[0])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def quadratic() -> QuadraticShear:
    return QuadraticShear()


@pytest.fixture
def identity2() -> Identity:
    return Identity(2)


@pytest.fixture
def doubling() -> AffineLinear:
    return AffineLinear(2.0 * np.eye(2))


@pytest.fixture
def modeled() -> ModeledDoubleGaussian:
    return ModeledDoubleGaussian()


@pytest.fixture
def vector_config() -> FlowConfig:
    return FlowConfig(
        data_kind="vector",
        dim=2,
        blocks=2,
        activation_order=2,
        coupling=FixedFilterNetConfig(),
        householder_reflections=2,
        actnorm_init="identity",
    )


@pytest.fixture
def feedforward_config() -> FlowConfig:
    return FlowConfig(
        data_kind="vector",
        dim=3,
        blocks=3,
        activation_order=3,
        coupling=FeedForwardNetConfig(widths=[8, 8]),
        householder_reflections=3,
        actnorm_init="identity",
    )


@pytest.fixture
def image_config() -> FlowConfig:
    return FlowConfig(
        data_kind="image",
        image_shape=(2, 4, 4),
        blocks=2,
        activation_order=2,
        coupling=ConvNetConfig(channels=[3], kernel_size=3),
        linear_kernel_size=3,
        actnorm_init="identity",
    )


@pytest.fixture
def perturbed_flow() -> Callable[..., FlowModel]:
    """Factory for flows whose parameters are moved away from their (near-trivial) init."""

    def make(cfg: FlowConfig, seed: int = 0, scale: float = 0.3) -> FlowModel:
        model = build_flow(cfg, seed=seed)
        noise = np.random.default_rng(seed + 100).standard_normal(len(model.params))
        model.set_params(model.params.values + scale * noise)
        return model

    return make
