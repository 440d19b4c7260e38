"""
Iso-Riemannian mappings: pullback mappings rescaled to respect ambient ℓ² arc length.

Geodesics are discretized at M + 1 uniformly spaced parameters; the cumulative ℓ² lengths
S_0 = 0 ≤ S_1 ≤ … ≤ S_M drive the time change τ^M, the rescaled logarithm and the stepping
scheme of the iso-exponential.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from isoflow.config import settings
from isoflow.diffeo.base import Array, Diffeomorphism, Point, TangentVector, as_batch
from isoflow.errors import ConfigError, IncompleteGeodesicError, StepCapError
from isoflow.geometry import pullback
from isoflow.utils.logging import get_logger

logger = get_logger(__name__)


def _resolution(M: int | None) -> int:
    M = settings.resolution if M is None else int(M)
    if M < 1:
        raise ConfigError(f"resolution M must be >= 1, got {M}")
    return M


@dataclass(frozen=True)
class DiscreteGeodesic:
    """Geodesic sampled at γ(k/M), k = 0..M, with cumulative ℓ² arc lengths."""

    resolution: int
    points: Array = field(repr=False)
    segment_lengths: Array = field(repr=False)
    cumulative: Array = field(repr=False)

    @property
    def length(self) -> float:
        """Total discrete arc length S_M."""
        return float(self.cumulative[-1])

    def interpolate(self, t: ArrayLike) -> Point:
        """
        Evaluate the piecewise-linear curve through the samples at parameter t.

        Args:
            t: Scalar or array of parameters in [0, 1]

        Returns:
            (d,) for scalar t, (len(t), d) otherwise
        """
        ts = np.clip(np.atleast_1d(np.asarray(t, dtype=np.float64)), 0.0, 1.0)
        scaled = ts * self.resolution
        k = np.clip(np.floor(scaled).astype(int), 0, self.resolution - 1)
        frac = (scaled - k)[:, None]
        out = self.points[k] + frac * (self.points[k + 1] - self.points[k])
        return out[0] if np.ndim(t) == 0 else out


def discretize_geodesic(
    d: Diffeomorphism, x: ArrayLike, y: ArrayLike, M: int | None = None
) -> DiscreteGeodesic:
    """
    Sample the pullback geodesic from x to y at M + 1 uniform parameters.

    Args:
        d: Diffeomorphism φ
        x: Start point (d,)
        y: End point (d,)
        M: Number of segments (defaults to ``settings.resolution``)

    Returns:
        DiscreteGeodesic with exact endpoints
    """
    M = _resolution(M)
    points = pullback.geodesic(d, x, y, np.linspace(0.0, 1.0, M + 1))
    points[0] = np.asarray(x, dtype=np.float64)
    points[-1] = np.asarray(y, dtype=np.float64)
    segments = np.linalg.norm(np.diff(points, axis=0), axis=1)
    cumulative = np.concatenate([[0.0], np.cumsum(segments)])
    return DiscreteGeodesic(
        resolution=M, points=points, segment_lengths=segments, cumulative=cumulative
    )


def time_change(g: DiscreteGeodesic, t: ArrayLike) -> float | Array:
    """
    Discrete time change τ^M(t) mapping arc-length fraction to geodesic parameter.

    τ(t) = K_t/M + (t·S_M − S_{K_t}) / (M (S_{K_t+1} − S_{K_t})) with
    K_t = max{k : S_k ≤ t·S_M} clamped to [0, M − 1].

    Args:
        g: Discretized geodesic
        t: Scalar or array of values in [0, 1]

    Returns:
        τ(t) with the shape of t; t itself for zero-length geodesics
    """
    ts = np.asarray(t, dtype=np.float64)
    total = g.length
    if total == 0.0:
        return float(ts) if ts.ndim == 0 else ts.copy()
    M = g.resolution
    target = np.atleast_1d(ts) * total
    k = np.clip(np.searchsorted(g.cumulative, target, side="right") - 1, 0, M - 1)
    seg = g.cumulative[k + 1] - g.cumulative[k]
    safe = np.where(seg > 0.0, seg, 1.0)
    frac = np.where(seg > 0.0, (target - g.cumulative[k]) / safe, 0.0)
    tau = (k + np.clip(frac, 0.0, 1.0)) / M
    return float(tau[0]) if ts.ndim == 0 else tau


def iso_geodesic(
    d: Diffeomorphism,
    x: ArrayLike,
    y: ArrayLike,
    t: ArrayLike,
    M: int | None = None,
    discrete: DiscreteGeodesic | None = None,
) -> Point:
    """
    Constant ℓ²-speed reparametrization γ_{x,y}(τ^M(t)).

    Args:
        d: Diffeomorphism φ
        x: Start point (d,)
        y: End point (d,)
        t: Scalar or array of parameters in [0, 1]
        M: Discretization resolution
        discrete: Precomputed discretization of the same geodesic

    Returns:
        (d,) for scalar t, (len(t), d) otherwise
    """
    g = discrete or discretize_geodesic(d, x, y, M)
    return pullback.geodesic(d, x, y, time_change(g, t))


def iso_log(d: Diffeomorphism, x: ArrayLike, y: ArrayLike, M: int | None = None) -> TangentVector:
    """
    Rescaled logarithm (S_M/‖log_x y‖₂)·log_x y whose ℓ² norm is the discrete arc length.

    Args:
        d: Diffeomorphism φ
        x: Base point (d,)
        y: Target point (d,)
        M: Discretization resolution

    Returns:
        Tangent vector at x; zero when x == y
    """
    v = pullback.log(d, x, y)
    size = np.linalg.norm(v)
    if size == 0.0:
        return np.zeros_like(v)
    return (discretize_geodesic(d, x, y, M).length / size) * v


def iso_distance(d: Diffeomorphism, x: ArrayLike, y: ArrayLike, M: int | None = None) -> float:
    """ℓ² arc length of the geodesic from x to y (equal to ‖iso_log(x, y)‖₂)."""
    return float(np.linalg.norm(iso_log(d, x, y, M)))


@dataclass(frozen=True)
class IsoExpTrace:
    """
    Record of the iso-exp stepping scheme.

    ``points`` holds χ^0..χ^K, ``step_lengths`` the ℓ² lengths of the K steps. When the
    scheme completes, the cumulative length at K − 1 is below ‖v‖₂ and reaches it at K;
    ``fraction`` locates the returned point inside the final step and ``zeta`` is the geodesic
    parameter consumed, (K − 1 + fraction)/M.
    """

    resolution: int
    target_length: float
    points: Array = field(repr=False)
    step_lengths: Array = field(repr=False)
    stopping_index: int
    fraction: float
    zeta: float
    completed: bool

    @property
    def cumulative(self) -> Array:
        return np.concatenate([[0.0], np.cumsum(self.step_lengths)])


def iso_exp(
    d: Diffeomorphism,
    x: ArrayLike,
    v: ArrayLike,
    M: int | None = None,
    step_cap: int | None = None,
) -> tuple[Point, IsoExpTrace]:
    """
    Walk along the geodesic from x in direction v until the ℓ² arc length reaches ‖v‖₂.

    Steps are χ^0 = x, χ^1 = exp_x(v/M) and χ^k = γ_{χ^{k−2}, χ^{k−1}}(2), which under a
    pullback metric are the preimages of the latent points φ(x) + k·D_xφ[v]/M. The returned
    point lies at arc length ‖v‖₂ on the polyline χ^0..χ^K.

    Args:
        d: Diffeomorphism φ
        x: Base point (d,)
        v: Tangent vector (d,)
        M: Discretization resolution
        step_cap: Maximum number of steps (defaults to
            ``settings.iso_exp_step_cap_factor`` · M)

    Returns:
        Tuple of (point, trace)

    Raises:
        IncompleteGeodesicError: If stepping leaves the image of φ first
        StepCapError: If the cap is reached first
    """
    M = _resolution(M)
    xb, _ = as_batch(x, d.dim)
    vb, _ = as_batch(v, d.dim)
    x0, v0 = xb[0], vb[0]
    target = float(np.linalg.norm(v0))
    cap = settings.iso_exp_step_cap_factor * M if step_cap is None else int(step_cap)

    if target == 0.0:
        trace = IsoExpTrace(
            resolution=M,
            target_length=0.0,
            points=x0[None, :].copy(),
            step_lengths=np.zeros(0),
            stopping_index=0,
            fraction=1.0,
            zeta=0.0,
            completed=True,
        )
        return x0.copy(), trace

    z0 = d.forward(x0)
    dz = d.jvp(x0, v0) / M
    chunks: list[Array] = [x0[None, :]]
    lengths: list[Array] = []
    walked = 0.0
    steps = 0

    def partial(completed: bool = False) -> IsoExpTrace:
        step_lengths = np.concatenate(lengths) if lengths else np.zeros(0)
        return IsoExpTrace(
            resolution=M,
            target_length=target,
            points=np.concatenate(chunks),
            step_lengths=step_lengths,
            stopping_index=steps,
            fraction=0.0,
            zeta=steps / M,
            completed=completed,
        )

    while True:
        chunk = min(M, cap - steps)
        if chunk <= 0:
            logger.warning("iso_exp_capped", steps=steps, cap=cap, walked=walked, target=target)
            raise StepCapError(
                f"iso-exp did not reach length {target} within {cap} steps",
                trace=partial(),
                cap=cap,
            )
        ks = np.arange(steps + 1, steps + chunk + 1, dtype=np.float64)
        latents = z0 + ks[:, None] * dz
        inside = np.asarray(d.contains(latents))
        valid = chunk if inside.all() else int(np.argmin(inside))

        if valid:
            pts = d.inverse(latents[:valid])
            prev = chunks[-1][-1]
            seg = np.linalg.norm(np.diff(np.vstack([prev[None, :], pts]), axis=0), axis=1)
            cum = walked + np.cumsum(seg)
            hit = int(np.searchsorted(cum, target, side="left"))
            if hit < valid:
                chunks.append(pts[: hit + 1])
                lengths.append(seg[: hit + 1])
                steps += hit + 1
                before = cum[hit] - seg[hit]
                fraction = float((target - before) / seg[hit])
                last, prior = pts[hit], (pts[hit - 1] if hit > 0 else prev)
                point = prior + fraction * (last - prior)
                trace = IsoExpTrace(
                    resolution=M,
                    target_length=target,
                    points=np.concatenate(chunks),
                    step_lengths=np.concatenate(lengths),
                    stopping_index=steps,
                    fraction=fraction,
                    zeta=(steps - 1 + fraction) / M,
                    completed=True,
                )
                logger.debug("iso_exp_complete", steps=steps, zeta=trace.zeta)
                return point, trace
            chunks.append(pts)
            lengths.append(seg)
            walked = float(cum[-1])
            steps += valid

        if valid < chunk:
            logger.warning("iso_exp_left_image", steps=steps, walked=walked, target=target)
            raise IncompleteGeodesicError(
                f"iso-exp left the image of {d.name} after {steps} steps "
                f"(length {walked:.6g} of {target:.6g})",
                trace=partial(),
            )


def iso_parallel_transport(
    d: Diffeomorphism, x: ArrayLike, y: ArrayLike, v: ArrayLike
) -> TangentVector:
    """
    (‖log_x y‖₂/‖log_y x‖₂)·P_{y←x}(v), which preserves the ℓ² length of geodesic velocities.

    Args:
        d: Diffeomorphism φ
        x: Source base point (d,)
        y: Target base point (d,)
        v: Tangent vector(s) at x

    Returns:
        Tangent vector(s) at y; v itself when x == y
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.array_equal(x, y):
        return np.array(v, dtype=np.float64)
    scale = np.linalg.norm(pullback.log(d, x, y)) / np.linalg.norm(pullback.log(d, y, x))
    return scale * pullback.parallel_transport(d, x, y, v)


def rho_id(d: Diffeomorphism, p: ArrayLike, w: ArrayLike, M: int | None = None) -> TangentVector:
    """ρ^id_p(w) = w, the plain variant's (identity) tangent transform."""
    return np.array(w, dtype=np.float64)


def rho_id_inverse(
    d: Diffeomorphism, p: ArrayLike, w: ArrayLike, M: int | None = None
) -> TangentVector:
    """(ρ^id_p)^{-1}(w) = w."""
    return np.array(w, dtype=np.float64)


def rho_iso(d: Diffeomorphism, p: ArrayLike, w: ArrayLike, M: int | None = None) -> TangentVector:
    """ρ^iso_p(w) = log_p(iso_exp_p(w)), a rescaling ζ_w·w of w."""
    point, _ = iso_exp(d, p, w, M)
    return pullback.log(d, p, point)


def rho_iso_inverse(
    d: Diffeomorphism, p: ArrayLike, w: ArrayLike, M: int | None = None
) -> TangentVector:
    """(ρ^iso_p)^{-1}(w) = iso_log_p(exp_p(w)) = (L(w)/‖w‖₂)·w."""
    return iso_log(d, p, pullback.exp(d, p, w), M)


RHO_TRANSFORMS = {
    "plain": (rho_id, rho_id_inverse),
    "iso": (rho_iso, rho_iso_inverse),
}
