"""Flows of horizontal vector fields with exact discrete horizontality.

The horizontal coordinates follow classical RK4 on the coupled system
h' = phi(p), z' = 1/2 w(h, h').  After every step the vertical coordinate is
replaced by the area of the cubic Hermite interpolant through the step (see
:mod:`hsmirnov.curves`), so each stored curve is exactly the horizontal lift of
its own interpolant while keeping fourth order accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .curves import HorizontalCurve, hermite_area_increment
from .group import as_point, homogeneous_norm, symplectic


class SpeedBoundError(RuntimeError):
    """The field exceeded unit speed at a visited sample."""


class HorizonError(ValueError):
    """Requested time lies outside the configured horizon."""


class GronwallError(RuntimeError):
    """A trajectory violated its Gronwall certificate."""


@dataclass(frozen=True)
class FlowConfig:
    dt: float
    t_max: float
    method: str = "rk4"
    gronwall_check: bool = False
    speed_tol: float = 1e-9

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_max >= self.dt:
            raise ValueError("dt must not exceed t_max")
        if self.method != "rk4":
            raise ValueError("only the fixed-step 'rk4' scheme is available")

    @property
    def steps(self) -> int:
        """Uniform step count; the effective step is t_max / steps <= dt."""
        return max(1, math.ceil(self.t_max / self.dt - 1e-9))

    @property
    def step(self) -> float:
        return self.t_max / self.steps


def _lift(p, v):
    """Coordinate velocity of the horizontal vector ``v`` at ``p``."""
    return np.concatenate([v, 0.5 * symplectic(p[:, :-1], v)[:, None]], axis=1)


def _check_speed(v, tol):
    s = np.linalg.norm(v, axis=1)
    if s.size and s.max() > 1.0 + tol:
        k = int(np.argmax(s))
        raise SpeedBoundError(f"field speed {s[k]:.12g} exceeds 1 + {tol:g} at a visited sample")


def integrate_batch(seeds, field, t_max: float, steps: int, speed_tol: float | None = 1e-9):
    """Integrate many seeds at once.

    Returns (samples, velocities) of shapes (S, steps+1, 2n+1) and
    (S, steps+1, 2n).  ``speed_tol=None`` disables the unit speed check.
    """
    p = np.array(as_point(seeds), dtype=float, ndmin=2)
    S, d = p.shape
    dt = t_max / steps
    samples = np.empty((S, steps + 1, d))
    vels = np.empty((S, steps + 1, d - 1))
    v = np.asarray(field(p), dtype=float).reshape(S, d - 1)
    samples[:, 0], vels[:, 0] = p, v
    for k in range(steps):
        if speed_tol is not None:
            _check_speed(v, speed_tol)
        k1 = _lift(p, v)
        q = p + 0.5 * dt * k1
        k2 = _lift(q, field(q))
        q = p + 0.5 * dt * k2
        k3 = _lift(q, field(q))
        q = p + dt * k3
        k4 = _lift(q, field(q))
        pn = p + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        # velocity at the RK4 point; z is then fixed by the Hermite area rule
        vn = np.asarray(field(pn), dtype=float).reshape(S, d - 1)
        pn[:, -1] = p[:, -1] + hermite_area_increment(p[:, :-1], pn[:, :-1], v, vn, dt)
        p, v = pn, vn
        samples[:, k + 1], vels[:, k + 1] = p, v
    if speed_tol is not None:
        _check_speed(v, speed_tol)
    return samples, vels


def integrate(seed, field, config: FlowConfig) -> HorizontalCurve:
    """Trajectory of ``field`` from ``seed`` on [0, t_max]."""
    seed = as_point(seed)
    if seed.ndim != 1:
        raise ValueError("integrate takes a single seed; use integrate_batch")
    samples, vels = integrate_batch(seed[None], field, config.t_max, config.steps, config.speed_tol)
    curve = HorizontalCurve(samples[0], vels[0], config.t_max)
    if config.gronwall_check:
        c = getattr(field, "growth_bound", None)
        if c is not None:
            rep = gronwall_certificate(curve, c, gronwall_rate(c))
            if not rep.holds:
                raise GronwallError(f"trajectory exceeds its Gronwall bound by {rep.max_excess:.3g}")
    return curve


@dataclass
class FlowMap:
    """The flow u(t, x) of an autonomous field, with a trajectory cache."""

    field: object
    config: FlowConfig
    _cache: dict = dc_field(default_factory=dict, repr=False)

    def trajectory(self, seed) -> HorizontalCurve:
        seed = as_point(seed)
        key = (tuple(float(c) for c in seed), self.config.steps, self.config.t_max)
        if key not in self._cache:
            self._cache[key] = integrate(seed, self.field, self.config)
        return self._cache[key]

    def __call__(self, t: float, x):
        return flow_at(x, t, self)


def flow_at(x, t: float, fmap: FlowMap) -> np.ndarray:
    """u(t, x); negative times follow the negated field."""
    x = as_point(x)
    if abs(t) > fmap.config.t_max * (1 + 1e-12):
        raise HorizonError(f"|t| = {abs(t)} exceeds the horizon {fmap.config.t_max}")
    if t == 0:
        return x.copy()
    steps = max(1, math.ceil(abs(t) / fmap.config.dt - 1e-9))
    f = fmap.field if t > 0 else (lambda p: -np.asarray(fmap.field(p)))
    samples, _ = integrate_batch(np.atleast_2d(x), f, abs(t), steps, fmap.config.speed_tol)
    return samples[0, -1] if x.ndim == 1 else samples[:, -1]


# --- Gronwall certificate ---------------------------------------------------

def gronwall_rate(c: float) -> float:
    """A rate K for which |phi(x)| <= c (1 + ||x||) gives the norm bound.

    With S = ||x||^4 = |h|^4 + z^2 and s = ||x||, the growth bound and
    |z'| <= |h| |h'| / 2 give S' <= 4 s^3 c(1 + s) + s^3 c(1 + s) = 5c(s^3 + s^4).
    Since s^3 <= 3/4 s^4 + 1/4 this is at most 8.75 c (S + 1), and Gronwall
    yields S(t) <= (S(0) + 1) e^(K t) - 1 with K = 8.75 c.
    """
    return 8.75 * c


@dataclass(frozen=True)
class GronwallReport:
    holds: bool
    max_excess: float  # max_k S(t_k) - bound(t_k); <= 0 when the bound holds
    min_slack: float  # min_k bound(t_k) - S(t_k)
    K: float


def gronwall_certificate(curve: HorizontalCurve, c: float, K: float, rtol: float = 1e-12) -> GronwallReport:
    """Check S(t) <= (S(0) + 1) e^(K t) - 1 at every sample of ``curve``."""
    S = homogeneous_norm(curve.samples) ** 4
    bound = (S[0] + 1.0) * np.exp(K * curve.times) - 1.0
    excess = S - bound
    ok = bool(np.all(excess <= rtol * (1.0 + np.abs(bound))))
    return GronwallReport(ok, float(excess.max()), float(-excess.max()) + 0.0, float(K))


# --- Liouville invariance -----------------------------------------------------

def liouville_residual(mu, J, t_grid, tests, grid: float = 0.02, dt: float = 0.01,
                       z_grid: float | None = None, chunk: int = 50_000) -> float:
    """max over t and f of |int f d rho_t - int f d rho| / int |f| d rho.

    rho = (|mu| * J) h is discretized by the seed quadrature and pushed
    forward through the flow of the mollified direction field.
    """
    from .calculus import MollifiedCharge
    from .seeds import seed_quadrature

    t_grid = [float(t) for t in t_grid]
    if not t_grid or len(mu) == 0:
        return 0.0
    mc = MollifiedCharge(mu, J)
    seeds = seed_quadrature(mc, grid, z_grid)
    t_max = max(t_grid)
    if t_max <= 0:
        return 0.0
    steps = max(1, math.ceil(t_max / dt - 1e-9))
    step = t_max / steps
    idx = [int(round(t / step)) for t in t_grid]
    pos = np.zeros((len(t_grid), len(tests)))
    base = np.zeros(len(tests))
    absb = np.zeros(len(tests))
    for s in range(0, len(seeds), chunk):
        P = seeds.points[s:s + chunk]
        m = seeds.masses[s:s + chunk]
        traj, _ = integrate_batch(P, mc.direction, t_max, steps)
        for j, f in enumerate(tests):
            f0 = np.asarray(f(P), dtype=float)
            base[j] += m @ f0
            absb[j] += m @ np.abs(f0)
            for a, k in enumerate(idx):
                pos[a, j] += m @ np.asarray(f(traj[:, k]), dtype=float)
    scale = np.where(absb > 0, absb, 1.0)
    return float(np.max(np.abs(pos - base[None]) / scale[None]))


__all__ = ["FlowConfig", "FlowMap", "SpeedBoundError", "HorizonError", "GronwallError",
           "integrate", "integrate_batch", "flow_at", "gronwall_rate", "gronwall_certificate",
           "GronwallReport", "liouville_residual"]
