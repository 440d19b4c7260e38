"""
Constant-determinant flow φ_θ = ψ_L ∘ … ∘ ψ_1.

``build_flow`` assembles the layers for a ``FlowConfig``, allocates the flat parameter vector,
binds every layer to its slice and initializes it deterministically from a seed.
"""

from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from isoflow.diffeo.base import Array, Diffeomorphism, as_batch
from isoflow.errors import ShapeError
from isoflow.flows.config import FlowConfig
from isoflow.flows.layers import ActNorm, AdditiveCoupling, FlowLayer, HouseholderStack
from isoflow.flows.masks import MaskSpec
from isoflow.flows.nets import ConvNet, CouplingNet, FeedForwardNet, FixedFilterNet
from isoflow.flows.params import ParamVector
from isoflow.utils.logging import get_logger

logger = get_logger(__name__)


class FlowModel(Diffeomorphism):
    """Learnable diffeomorphism with analytic JVPs and reverse-mode gradients."""

    name = "flow"

    def __init__(
        self, config: FlowConfig, layers: list[FlowLayer], params: ParamVector, seed: int
    ) -> None:
        super().__init__(config.ambient_dim, config.image_shape)
        self.config = config
        self.layers = layers
        self.params = params
        self.seed = seed

    # ------------------------------------------------------------------ hooks

    def _forward(self, x: Array) -> Array:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def _inverse(self, y: Array) -> Array:
        for layer in reversed(self.layers):
            y = layer.inverse(y)
        return y

    def _jvp(self, x: Array, v: Array) -> Array:
        for layer in self.layers:
            x, v = layer.jvp(x, v)
        return v

    def _inverse_jvp(self, y: Array, w: Array) -> Array:
        for layer in reversed(self.layers):
            y, w = layer.inverse_jvp(y, w)
        return w

    def _log_abs_det(self, x: Array) -> Array:
        return np.full(x.shape[0], self.logdet())

    # ----------------------------------------------------------------- public

    def logdet(self) -> float:
        """Constant log|det Dφ_θ| (only actnorm layers contribute)."""
        return float(sum(layer.logdet() for layer in self.layers))

    @property
    def actnorm_layers(self) -> list[ActNorm]:
        return [layer for layer in self.layers if isinstance(layer, ActNorm)]

    @property
    def actnorm_initialized(self) -> bool:
        return all(layer.initialized for layer in self.actnorm_layers)

    def initialize_actnorm(self, x: ArrayLike) -> None:
        """
        Run data-dependent actnorm init, layer by layer, on a batch.

        Args:
            x: (n, d) batch (typically the first training batch)
        """
        batch, _ = self._checked(x)
        for layer in self.layers:
            if isinstance(layer, ActNorm) and not layer.initialized:
                layer.initialize(batch)
            batch = layer.forward(batch)
        logger.info("actnorm_initialized", layers=len(self.actnorm_layers), batch=len(x))

    def vjp(
        self, x: ArrayLike, g_out: ArrayLike, g_logdet: float = 0.0
    ) -> tuple[Array, Array]:
        """
        Reverse-mode gradient of Σ_n ⟨g_out_n, φ(x_n)⟩ + g_logdet · log|det Dφ|.

        Args:
            x: Point (d,) or batch (n, d)
            g_out: Cotangent of the output, same shape as x
            g_logdet: Cotangent of the (constant) log-determinant

        Returns:
            Tuple of (flat gradient over the ParamVector, gradient over x)
        """
        xb, single = self._checked(x)
        gb, _ = as_batch(g_out, self.dim)
        if gb.shape != xb.shape:
            raise ShapeError(f"cotangent shape {gb.shape} does not match input {xb.shape}")
        _, caches = self.forward_with_caches(xb)
        g_theta, g = self.backward_from_caches(caches, gb, g_logdet)
        return g_theta, (g[0] if single else g)

    def forward_with_caches(self, xb: Array) -> tuple[Array, list[Any]]:
        """Forward pass on an (n, d) batch keeping per-layer caches for the backward pass."""
        caches: list[Any] = []
        h = xb
        for layer in self.layers:
            h, cache = layer.forward_cache(h)
            caches.append(cache)
        return h, caches

    def backward_from_caches(
        self, caches: list[Any], g_out: Array, g_logdet: float
    ) -> tuple[Array, Array]:
        """Backward pass matching ``forward_with_caches``; returns (flat θ gradient, x gradient)."""
        g_theta = self.params.zeros_like()
        g = g_out
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            g, grads = layer.backward(cache, g, g_logdet)
            for name, block in grads.items():
                self.params.view(f"{layer.layer_id}.{name}", g_theta)[...] += block
        return g_theta, g

    def set_params(self, values: ArrayLike) -> None:
        """Overwrite θ in place (layer views stay valid)."""
        self.params.values[...] = np.asarray(values, dtype=np.float64)

    def __repr__(self) -> str:
        return (
            f"FlowModel(kind={self.config.data_kind}, dim={self.dim}, "
            f"blocks={self.config.blocks}, params={len(self.params)})"
        )


def flow_vjp(
    model: FlowModel, x: ArrayLike, g_out: ArrayLike, g_logdet: float = 0.0
) -> tuple[Array, Array]:
    """Functional form of ``FlowModel.vjp``."""
    return model.vjp(x, g_out, g_logdet)


def _coupling_net(cfg: FlowConfig) -> CouplingNet:
    net = cfg.coupling
    if net.kind == "fixed_filter":
        return FixedFilterNet(cfg.ambient_dim, net.taps, cfg.activation_order)
    if net.kind == "feedforward":
        return FeedForwardNet(cfg.ambient_dim, net.widths, cfg.activation_order)
    assert cfg.image_shape is not None
    return ConvNet(cfg.image_shape, net.channels, net.kernel_size, cfg.activation_order)


def build_layers(cfg: FlowConfig) -> list[FlowLayer]:
    """
    Assemble the uninitialized layer stack for a config.

    Args:
        cfg: Flow architecture

    Returns:
        Layers in forward order
    """
    dim = cfg.ambient_dim
    identity_init = cfg.actnorm_init == "identity"
    layers: list[FlowLayer] = []
    for k in range(cfg.blocks):
        prefix = f"block{k}"
        if cfg.data_kind == "vector":
            mask = MaskSpec.vector(dim, parity=k)
            layers += [
                ActNorm(f"{prefix}.actnorm", dim, initialized=identity_init),
                HouseholderStack(f"{prefix}.householder", dim, cfg.householder_reflections),
            ]
        else:
            assert cfg.image_shape is not None
            mask = MaskSpec.checkerboard(cfg.image_shape, parity=k)
            kernel = cfg.linear_kernel_size
            layers += [
                ActNorm(f"{prefix}.actnorm", dim, cfg.image_shape, initialized=identity_init),
                # reads ~J, updates J
                AdditiveCoupling(
                    f"{prefix}.conv_a",
                    mask.complement(),
                    ConvNet(cfg.image_shape, [], kernel, cfg.activation_order),
                ),
                # reads J, updates ~J
                AdditiveCoupling(
                    f"{prefix}.conv_b",
                    mask,
                    ConvNet(cfg.image_shape, [], kernel, cfg.activation_order),
                ),
            ]
        layers.append(AdditiveCoupling(f"{prefix}.coupling", mask, _coupling_net(cfg)))
    return layers


def allocate_params(layers: list[FlowLayer]) -> ParamVector:
    """Allocate θ for a layer stack and bind every layer to its slices."""
    specs = [
        (f"{layer.layer_id}.{name}", shape)
        for layer in layers
        for name, shape in layer.param_specs()
    ]
    params = ParamVector.allocate(specs)
    for layer in layers:
        layer.bind(
            {name: params.view(f"{layer.layer_id}.{name}") for name, _ in layer.param_specs()}
        )
    return params


def build_flow(cfg: FlowConfig, seed: int = 0) -> FlowModel:
    """
    Build and deterministically initialize a flow.

    Args:
        cfg: Flow architecture
        seed: Initialization seed

    Returns:
        FlowModel (actnorm layers await data-dependent init unless ``actnorm_init="identity"``)
    """
    layers = build_layers(cfg)
    params = allocate_params(layers)
    rng = np.random.default_rng(seed)
    for layer in layers:
        layer.init_params(rng, cfg.init_scale)
    model = FlowModel(cfg, layers, params, seed)
    logger.info(
        "flow_built",
        data_kind=cfg.data_kind,
        dim=cfg.ambient_dim,
        blocks=cfg.blocks,
        params=len(params),
        seed=seed,
    )
    return model
