"""
Invertible flow layers: actnorm, Householder reflections and additive couplings.

Layers act on flattened (n, d) batches. Every layer provides forward, inverse, forward-mode
JVPs in both directions, its constant log|det| and an analytic backward rule.
"""

from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from isoflow.diffeo.base import Array
from isoflow.errors import ActNormStateError
from isoflow.flows.masks import MaskSpec
from isoflow.flows.nets import CouplingNet, Grads, ParamSpecs

ACTNORM_EPS = 1e-12


def householder_apply(vectors: Array, x: Array, reverse: bool = False) -> Array:
    """
    Apply the reflections H_k x = x − 2 v_k (v_k·x)/‖v_k‖² in sequence.

    Args:
        vectors: (K, d) reflection normals
        x: (n, d) batch
        reverse: Apply in reverse order (the inverse map)

    Returns:
        Reflected batch
    """
    order = range(vectors.shape[0] - 1, -1, -1) if reverse else range(vectors.shape[0])
    for k in order:
        v = vectors[k]
        x = x - np.outer(x @ v, v) * (2.0 / (v @ v))
    return x


class FlowLayer(ABC):
    """Base class for invertible layers bound to slices of a ParamVector."""

    def __init__(self, layer_id: str) -> None:
        self.layer_id = layer_id
        self.p: dict[str, Array] = {}

    def param_specs(self) -> ParamSpecs:
        return []

    def bind(self, views: dict[str, Array]) -> None:
        self.p = views

    def init_params(self, rng: np.random.Generator, init_scale: float) -> None:
        pass

    @abstractmethod
    def forward(self, x: Array) -> Array: ...

    @abstractmethod
    def inverse(self, y: Array) -> Array: ...

    @abstractmethod
    def jvp(self, x: Array, v: Array) -> tuple[Array, Array]:
        """Return (forward(x), D_x[v])."""

    @abstractmethod
    def inverse_jvp(self, y: Array, w: Array) -> tuple[Array, Array]:
        """Return (inverse(y), D_y inverse[w])."""

    @abstractmethod
    def backward(self, cache: Any, g_y: Array, g_logdet: float) -> tuple[Array, Grads]:
        """Gradients of Σ g_y ⊙ forward(x) + g_logdet · logdet."""

    def forward_cache(self, x: Array) -> tuple[Array, Any]:
        return self.forward(x), x

    def logdet(self) -> float:
        return 0.0


class ActNorm(FlowLayer):
    """
    y = exp(log_scale) ⊙ x + bias, per dimension (vectors) or per channel (images).
    """

    def __init__(
        self,
        layer_id: str,
        dim: int,
        image_shape: tuple[int, int, int] | None = None,
        initialized: bool = True,
    ) -> None:
        super().__init__(layer_id)
        self.dim = dim
        self.image_shape = image_shape
        self.features = image_shape[0] if image_shape else dim
        self.repeat = dim // self.features
        self.initialized = initialized

    def param_specs(self) -> ParamSpecs:
        return [("log_scale", (self.features,)), ("bias", (self.features,))]

    def init_params(self, rng: np.random.Generator, init_scale: float) -> None:
        self.p["log_scale"][...] = 0.0
        self.p["bias"][...] = 0.0

    def _expand(self, per_feature: Array) -> Array:
        return np.repeat(per_feature, self.repeat)

    def _fold(self, per_coord: Array) -> Array:
        return per_coord.reshape(self.features, self.repeat).sum(axis=1)

    def _require_init(self) -> None:
        if not self.initialized:
            raise ActNormStateError(
                f"actnorm layer {self.layer_id} has not been initialized from data",
                layer=self.layer_id,
            )

    def initialize(self, x: Array) -> None:
        """
        Data-dependent init: make this layer's outputs zero-mean, unit-variance per feature.

        Args:
            x: (n, d) batch of this layer's inputs
        """
        grouped = x.reshape(x.shape[0], self.features, self.repeat)
        mean = grouped.mean(axis=(0, 2))
        var = grouped.var(axis=(0, 2))
        scale = 1.0 / np.sqrt(var + ACTNORM_EPS)
        self.p["log_scale"][...] = np.log(scale)
        self.p["bias"][...] = -mean * scale
        self.initialized = True

    def _scale(self) -> Array:
        return self._expand(np.exp(self.p["log_scale"]))

    def forward(self, x: Array) -> Array:
        self._require_init()
        return x * self._scale() + self._expand(self.p["bias"])

    def inverse(self, y: Array) -> Array:
        self._require_init()
        return (y - self._expand(self.p["bias"])) / self._scale()

    def jvp(self, x: Array, v: Array) -> tuple[Array, Array]:
        return self.forward(x), v * self._scale()

    def inverse_jvp(self, y: Array, w: Array) -> tuple[Array, Array]:
        return self.inverse(y), w / self._scale()

    def logdet(self) -> float:
        self._require_init()
        return float(np.sum(self.p["log_scale"]) * self.repeat)

    def backward(self, cache: Any, g_y: Array, g_logdet: float) -> tuple[Array, Grads]:
        x = cache
        scale = self._scale()
        grads = {
            "log_scale": self._fold(np.sum(g_y * x, axis=0) * scale) + g_logdet * self.repeat,
            "bias": self._fold(np.sum(g_y, axis=0)),
        }
        return g_y * scale, grads


class HouseholderStack(FlowLayer):
    """Orthogonal map given by a product of Householder reflections."""

    def __init__(self, layer_id: str, dim: int, count: int) -> None:
        super().__init__(layer_id)
        self.dim = dim
        self.count = count

    def param_specs(self) -> ParamSpecs:
        return [("vectors", (self.count, self.dim))] if self.count else []

    def init_params(self, rng: np.random.Generator, init_scale: float) -> None:
        if not self.count:
            return
        vectors = self.p["vectors"]
        for k in range(self.count):
            v = rng.standard_normal(self.dim)
            while np.linalg.norm(v) < 1e-6:
                v = rng.standard_normal(self.dim)
            vectors[k] = v / np.linalg.norm(v)

    def _vectors(self) -> Array:
        return self.p["vectors"] if self.count else np.zeros((0, self.dim))

    def forward(self, x: Array) -> Array:
        return householder_apply(self._vectors(), x)

    def inverse(self, y: Array) -> Array:
        return householder_apply(self._vectors(), y, reverse=True)

    def jvp(self, x: Array, v: Array) -> tuple[Array, Array]:
        return self.forward(x), self.forward(v)

    def inverse_jvp(self, y: Array, w: Array) -> tuple[Array, Array]:
        return self.inverse(y), self.inverse(w)

    def forward_cache(self, x: Array) -> tuple[Array, Any]:
        inputs = []
        vectors = self._vectors()
        for k in range(self.count):
            inputs.append(x)
            x = householder_apply(vectors[k : k + 1], x)
        return x, inputs

    def backward(self, cache: Any, g_y: Array, g_logdet: float) -> tuple[Array, Grads]:
        if not self.count:
            return g_y, {}
        vectors = self._vectors()
        g_vectors = np.zeros_like(vectors)
        g = g_y
        for k in reversed(range(self.count)):
            x = cache[k]
            v = vectors[k]
            s = v @ v
            a = x @ v
            gv_dot = g @ v
            g_vectors[k] = (
                -2.0 / s * (a @ g)
                - 2.0 / s * (gv_dot @ x)
                + 4.0 / s**2 * (gv_dot @ a) * v
            )
            g = g - np.outer(gv_dot, v) * (2.0 / s)
        return g, {"vectors": g_vectors}


class AdditiveCoupling(FlowLayer):
    """
    y = x + (1 − m_J) ⊙ f(m_J ⊙ x).

    Entries in J pass through unchanged; the rest are shifted by the coupling net. Used with a
    feed-forward or fixed-filter net for vector data, a conv net for image data and a single
    convolution for the invertible linear image layers.
    """

    def __init__(self, layer_id: str, mask: MaskSpec, net: CouplingNet) -> None:
        super().__init__(layer_id)
        self.mask = mask.mask
        self.keep = 1.0 - mask.mask
        self.net = net

    def param_specs(self) -> ParamSpecs:
        return self.net.param_specs()

    def bind(self, views: dict[str, Array]) -> None:
        super().bind(views)
        self.net.bind(views)

    def init_params(self, rng: np.random.Generator, init_scale: float) -> None:
        self.net.init_params(rng, init_scale)

    def shift(self, x: Array) -> Array:
        return self.keep * self.net.forward(self.mask * x)

    def forward(self, x: Array) -> Array:
        return x + self.shift(x)

    def inverse(self, y: Array) -> Array:
        return y - self.shift(y)

    def jvp(self, x: Array, v: Array) -> tuple[Array, Array]:
        out, d_out = self.net.jvp(self.mask * x, self.mask * v)
        return x + self.keep * out, v + self.keep * d_out

    def inverse_jvp(self, y: Array, w: Array) -> tuple[Array, Array]:
        out, d_out = self.net.jvp(self.mask * y, self.mask * w)
        return y - self.keep * out, w - self.keep * d_out

    def forward_cache(self, x: Array) -> tuple[Array, Any]:
        out, cache = self.net.forward_cache(self.mask * x)
        return x + self.keep * out, cache

    def backward(self, cache: Any, g_y: Array, g_logdet: float) -> tuple[Array, Grads]:
        g_u, grads = self.net.backward(cache, self.keep * g_y)
        return g_y + self.mask * g_u, grads
