"""
Coupling networks f used inside additive couplings y = x + m_{~J} ⊙ f(m_J ⊙ x).

Each net works on flattened (n, d) batches and provides forward, a cached forward for the
backward pass, an analytic backward rule and a forward-mode JVP.
"""

from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from isoflow.diffeo.base import Array
from isoflow.flows.activations import (
    tanh_poly,
    tanh_poly_coefficient_grad,
    tanh_poly_derivative,
)
from isoflow.flows.conv import conv2d, conv2d_input_grad, conv2d_kernel_grad

ParamSpecs = list[tuple[str, tuple[int, ...]]]
Grads = dict[str, Array]


class CouplingNet(ABC):
    """Base class for coupling networks."""

    def __init__(self) -> None:
        self.p: dict[str, Array] = {}

    @abstractmethod
    def param_specs(self) -> ParamSpecs:
        """(name, shape) of every learnable block."""

    def bind(self, views: dict[str, Array]) -> None:
        """Attach views into the flat parameter vector."""
        self.p = views

    @abstractmethod
    def init_params(self, rng: np.random.Generator, init_scale: float) -> None:
        """Write initial values into the bound views."""

    @abstractmethod
    def forward_cache(self, u: Array) -> tuple[Array, Any]:
        """Evaluate f(u) and keep what the backward pass needs."""

    @abstractmethod
    def backward(self, cache: Any, g_out: Array) -> tuple[Array, Grads]:
        """Return (∂/∂u, ∂/∂params) of Σ g_out ⊙ f(u)."""

    @abstractmethod
    def jvp(self, u: Array, du: Array) -> tuple[Array, Array]:
        """Return (f(u), D_u f[du])."""

    def forward(self, u: Array) -> Array:
        return self.forward_cache(u)[0]


class FixedFilterNet(CouplingNet):
    """
    Fixed zero-padded 1D filter followed by a learnable tanh-poly activation per entry.

    f(u)_j = σ_j(Σ_i taps_i u_{j+i−r}); only the activation coefficients are learnable.
    """

    def __init__(self, dim: int, taps: list[float], order: int) -> None:
        super().__init__()
        self.dim = dim
        self.order = order
        radius = len(taps) // 2
        band = np.zeros((dim, dim))
        for j in range(dim):
            for i, tap in enumerate(taps):
                k = j + i - radius
                if 0 <= k < dim:
                    band[j, k] = tap
        self.band = band

    def param_specs(self) -> ParamSpecs:
        return [("activation", (self.dim, self.order))]

    def init_params(self, rng: np.random.Generator, init_scale: float) -> None:
        a = self.p["activation"]
        a[...] = 0.0
        a[:, 0] = init_scale

    def forward_cache(self, u: Array) -> tuple[Array, Any]:
        s = u @ self.band.T
        return tanh_poly(self.p["activation"], s), s

    def backward(self, cache: Any, g_out: Array) -> tuple[Array, Grads]:
        s = cache
        a = self.p["activation"]
        g_s = g_out * tanh_poly_derivative(a, s)
        grads = {"activation": tanh_poly_coefficient_grad(s, g_out, self.order)}
        return g_s @ self.band, grads

    def jvp(self, u: Array, du: Array) -> tuple[Array, Array]:
        s = u @ self.band.T
        a = self.p["activation"]
        return tanh_poly(a, s), tanh_poly_derivative(a, s) * (du @ self.band.T)


class _StackedNet(CouplingNet):
    """Affine maps interleaved with per-site tanh-poly activations; the last map is linear."""

    def __init__(self, sizes: list[int], order: int) -> None:
        super().__init__()
        self.sizes = sizes
        self.order = order
        self.depth = len(sizes) - 1

    @abstractmethod
    def _weight_shape(self, i: int) -> tuple[int, ...]: ...

    @abstractmethod
    def _to_input(self, u: Array) -> Array: ...

    @abstractmethod
    def _to_output(self, h: Array) -> Array: ...

    @abstractmethod
    def _apply(self, w: Array, h: Array) -> Array:
        """Linear part of layer i (no bias)."""

    @abstractmethod
    def _apply_input_grad(self, w: Array, g: Array) -> Array: ...

    @abstractmethod
    def _apply_weight_grad(self, h: Array, g: Array, w: Array) -> Array: ...

    @abstractmethod
    def _bias(self, b: Array, ndim: int) -> Array: ...

    @abstractmethod
    def _bias_grad(self, g: Array) -> Array: ...

    def param_specs(self) -> ParamSpecs:
        specs: ParamSpecs = []
        for i in range(self.depth):
            specs.append((f"w{i}", self._weight_shape(i)))
            specs.append((f"b{i}", (self.sizes[i + 1],)))
            if i < self.depth - 1:
                specs.append((f"act{i}", (self.sizes[i + 1], self.order)))
        return specs

    def init_params(self, rng: np.random.Generator, init_scale: float) -> None:
        for i in range(self.depth):
            w = self.p[f"w{i}"]
            w[...] = init_scale * rng.standard_normal(w.shape)
            self.p[f"b{i}"][...] = 0.0
            if i < self.depth - 1:
                a = self.p[f"act{i}"]
                a[...] = 0.0
                a[:, 0] = 1.0

    def _pre(self, i: int, h: Array) -> Array:
        return self._apply(self.p[f"w{i}"], h) + self._bias(self.p[f"b{i}"], h.ndim)

    def forward_cache(self, u: Array) -> tuple[Array, Any]:
        h = self._to_input(u)
        cache = []
        for i in range(self.depth):
            z = self._pre(i, h)
            cache.append((h, z))
            h = tanh_poly(self.p[f"act{i}"], z) if i < self.depth - 1 else z
        return self._to_output(h), cache

    def backward(self, cache: Any, g_out: Array) -> tuple[Array, Grads]:
        grads: Grads = {}
        g = self._to_input(g_out)
        for i in reversed(range(self.depth)):
            h, z = cache[i]
            if i < self.depth - 1:
                a = self.p[f"act{i}"]
                grads[f"act{i}"] = tanh_poly_coefficient_grad(z, g, self.order)
                g = g * tanh_poly_derivative(a, z)
            w = self.p[f"w{i}"]
            grads[f"w{i}"] = self._apply_weight_grad(h, g, w)
            grads[f"b{i}"] = self._bias_grad(g)
            g = self._apply_input_grad(w, g)
        return self._to_output(g), grads

    def jvp(self, u: Array, du: Array) -> tuple[Array, Array]:
        h = self._to_input(u)
        dh = self._to_input(du)
        for i in range(self.depth):
            z = self._pre(i, h)
            dz = self._apply(self.p[f"w{i}"], dh)
            if i < self.depth - 1:
                a = self.p[f"act{i}"]
                h, dh = tanh_poly(a, z), tanh_poly_derivative(a, z) * dz
            else:
                h, dh = z, dz
        return self._to_output(h), self._to_output(dh)


class FeedForwardNet(_StackedNet):
    """Fully connected net d → widths → d."""

    def __init__(self, dim: int, widths: list[int], order: int) -> None:
        super().__init__([dim, *widths, dim], order)

    def _weight_shape(self, i: int) -> tuple[int, ...]:
        return (self.sizes[i + 1], self.sizes[i])

    def _to_input(self, u: Array) -> Array:
        return u

    def _to_output(self, h: Array) -> Array:
        return h

    def _apply(self, w: Array, h: Array) -> Array:
        return h @ w.T

    def _apply_input_grad(self, w: Array, g: Array) -> Array:
        return g @ w

    def _apply_weight_grad(self, h: Array, g: Array, w: Array) -> Array:
        return g.T @ h

    def _bias(self, b: Array, ndim: int) -> Array:
        return b

    def _bias_grad(self, g: Array) -> Array:
        return g.sum(axis=0)


class ConvNet(_StackedNet):
    """
    Same-padded conv net c → channels → c on images of shape (c, h, w).

    With no hidden channels it is a single convolution, the coupling used by the invertible
    linear image layers.
    """

    def __init__(
        self, image_shape: tuple[int, int, int], channels: list[int], kernel_size: int, order: int
    ) -> None:
        c = image_shape[0]
        super().__init__([c, *channels, c], order)
        self.image_shape = image_shape
        self.kernel_size = kernel_size

    def _weight_shape(self, i: int) -> tuple[int, ...]:
        return (self.sizes[i + 1], self.sizes[i], self.kernel_size, self.kernel_size)

    def _to_input(self, u: Array) -> Array:
        return u.reshape((u.shape[0], *self.image_shape))

    def _to_output(self, h: Array) -> Array:
        return h.reshape(h.shape[0], -1)

    def _apply(self, w: Array, h: Array) -> Array:
        return conv2d(h, w)

    def _apply_input_grad(self, w: Array, g: Array) -> Array:
        return conv2d_input_grad(g, w)

    def _apply_weight_grad(self, h: Array, g: Array, w: Array) -> Array:
        return conv2d_kernel_grad(h, g, self.kernel_size)

    def _bias(self, b: Array, ndim: int) -> Array:
        return b[:, None, None]

    def _bias_grad(self, g: Array) -> Array:
        return g.sum(axis=(0, 2, 3))
