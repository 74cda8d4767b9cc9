"""Decomposition of discrete horizontal charges into curves.

Solenoidal pipeline: mollify mu on the right, take the direction field
phi = (J * mu) / (|mu| * J) with |phi| <= 1, discretize rho = (|mu| * J) h on a
grid and flow every node for time l.  Each trajectory receives weight
mass / l, so l * total(nu) is the mass of rho, and by Liouville invariance of
rho the curves reproduce J * mu.

General pipeline: lift mu to a solenoidal charge one dimension up, decompose
the lift, keep the curves that touch the plane {x_(n+1) = 0}, clip them to
their plane contact and project back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .calculus import DiscreteCharge, MollifiedCharge, Mollifier, horizontal_gradient, weak_divergence
from .curves import HorizontalCurve, hermite_area_increment, trapezoid_weights
from .dictionaries import VERSION, Box, scalar_dictionary, vector_dictionary
from .flow import FlowConfig, integrate_batch
from .seeds import SeedQuadrature, seed_quadrature


class NotSolenoidal(ValueError):
    """The charge has non-negligible horizontal divergence."""


class EmptyCharge(ValueError):
    """The operation needs a charge with at least one atom."""


class NoPlaneContact(RuntimeError):
    """A lifted curve never meets the plane x_(n+1) = 0."""


SAMPLE_BUDGET = 4_000_000  # trajectory samples held in memory per chunk
SLOW_SPEED = 0.99

DEFAULT_TOLERANCES = {
    "mass_identity": 1e-3,
    "pairing": 2e-2,
    "variation": 2e-2,
    "support": 1e-3,
    "speed": 5e-2,
    "contact": 1e-10,
}


# --- divergence test ------------------------------------------------------------------

def divergence_residual(mu: DiscreteCharge, tests) -> float:
    """max_f |<div_H mu, f>| / (var(mu) max_i |grad_H f(x_i)|)."""
    if len(mu) == 0:
        return 0.0
    worst = 0.0
    for f in tests:
        g = horizontal_gradient(f, mu.points)
        scale = mu.variation * float(np.max(np.linalg.norm(g, axis=1)))
        if scale > 0:
            worst = max(worst, abs(weak_divergence(mu, f)) / scale)
    return worst


def default_dictionaries(mu: DiscreteCharge, eps: float):
    box = Box.around(mu.points, eps)
    return scalar_dictionary(box), vector_dictionary(box)


# --- curve measures --------------------------------------------------------------------

STAT_KEYS = ("length", "variation", "far", "slow", "contact", "speed_max", "samples")


@dataclass
class CurveMeasure:
    """Finite atomic measure on curves of horizon l.

    ``curves`` may be omitted for large runs; the per-curve statistics in
    ``stats`` (and ``acts``, the pairings with a named dictionary) are then the
    only record of the curves.
    """

    l: float
    n: int
    weights: np.ndarray
    curves: list | None = None
    stats: dict = dc_field(default_factory=dict)
    acts: np.ndarray | None = None
    act_names: tuple = ()
    info: dict = dc_field(default_factory=dict)

    def __len__(self):
        return len(self.weights)

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    @property
    def entries(self):
        if self.curves is None:
            raise ValueError("curves were not kept for this measure")
        return list(zip(self.curves, self.weights))

    @classmethod
    def empty(cls, n: int, l: float, info=None) -> "CurveMeasure":
        return cls(float(l), n, np.zeros(0), [], {k: np.zeros(0) for k in STAT_KEYS},
                   np.zeros((0, 0)), (), dict(info or {}))

    def with_weights(self, weights) -> "CurveMeasure":
        w = np.asarray(weights, dtype=float)
        if w.shape != self.weights.shape:
            raise ValueError("weight count mismatch")
        return CurveMeasure(self.l, self.n, w, self.curves, self.stats, self.acts, self.act_names, dict(self.info))

    def to_json(self) -> dict:
        if self.curves is None:
            raise ValueError("only measures with curves can be serialized")
        return {"l": self.l, "n": self.n, "entries": [
            {"weight": float(w), "curve": {"l": c.l, "samples": c.samples.tolist(),
                                           "velocities": c.velocities.tolist()}}
            for c, w in zip(self.curves, self.weights)]}

    @classmethod
    def from_json(cls, data: dict) -> "CurveMeasure":
        l = float(data["l"])
        entries = data["entries"]
        curves = [HorizontalCurve(e["curve"]["samples"], e["curve"]["velocities"], e["curve"]["l"]) for e in entries]
        n = int(data.get("n", curves[0].n if curves else 1))
        for c in curves:
            if c.n != n or abs(c.l - l) > 1e-12 * max(1.0, l):
                raise ValueError("curve does not match the measure's group or horizon")
        return cls(l, n, np.array([float(e["weight"]) for e in entries]), curves)


def _chunk_size(steps: int, chunk: int | None) -> int:
    return chunk or max(256, SAMPLE_BUDGET // (steps + 1))


def _curve_stats(samples, vels, l, dictionary, support=None):
    """Per-curve length, variation, pairings and sample diagnostics for a batch."""
    S, M1, d = samples.shape
    dt = l / (M1 - 1)
    w = trapezoid_weights(M1 - 1, dt)
    speeds = np.linalg.norm(vels, axis=2)
    length = speeds @ w
    acts = np.empty((S, len(dictionary)))
    for j, phi in enumerate(dictionary):
        acts[:, j] = np.sum(phi(samples) * vels, axis=2) @ w
    if support is not None:
        far = np.mean(~support(samples.reshape(-1, d)).reshape(S, M1), axis=1)
    else:
        far = np.zeros(S)
    h, z = samples[:, :, :-1], samples[:, :, -1]
    res = np.diff(z, axis=1) - hermite_area_increment(h[:, :-1], h[:, 1:], vels[:, :-1], vels[:, 1:], dt)
    stats = {"length": length, "variation": length.copy(), "far": far,
             "slow": np.mean(speeds < SLOW_SPEED, axis=1),
             "contact": np.max(np.abs(res), axis=1) if M1 > 1 else np.zeros(S),
             "speed_max": speeds.max(axis=1), "samples": np.full(S, float(M1))}
    return stats, acts


class _Collector:
    """Accumulates weights, statistics and (optionally) curves chunk by chunk."""

    def __init__(self, keep_curves):
        self.keep = keep_curves
        self.weights, self.acts, self.curves = [], [], []
        self.stats = {k: [] for k in STAT_KEYS}

    def add(self, weights, samples, vels, l, stats, acts):
        self.weights.append(weights)
        self.acts.append(acts)
        for k in STAT_KEYS:
            self.stats[k].append(stats[k])
        if self.keep:
            self.curves.extend(HorizontalCurve(s, v, l) for s, v in zip(samples, vels))

    def measure(self, l, n, names, info) -> CurveMeasure:
        if not self.weights:
            return CurveMeasure(l, n, np.zeros(0), [] if self.keep else None,
                                {k: np.zeros(0) for k in STAT_KEYS}, np.zeros((0, len(names))), names, info)
        return CurveMeasure(l, n, np.concatenate(self.weights), self.curves if self.keep else None,
                            {k: np.concatenate(v) for k, v in self.stats.items()},
                            np.concatenate(self.acts), names, info)


def _flow_config(l, dt, flow):
    if flow is None:
        if dt is None:
            raise ValueError("give either dt or a FlowConfig")
        return FlowConfig(dt, l)
    if abs(flow.t_max - l) > 1e-12 * max(1.0, l):
        raise ValueError("flow horizon must equal l")
    return flow


# --- solenoidal pipeline -----------------------------------------------------------

def decompose_solenoidal(mu: DiscreteCharge, l: float, eps: float, grid: float, flow: FlowConfig | None = None,
                         *, dt: float | None = None, z_grid: float | None = None, tol: float = 1e-3,
                         dictionary=None, tests=None, keep_curves: bool = True, jitter_seed: int | None = None,
                         chunk: int | None = None, check: bool = True) -> CurveMeasure:
    """nu with l total(nu) = mass of rho and sum_gamma w [gamma] ~ J_eps * mu.

    ``dictionary`` (vector fields) is paired with every curve on the fly and
    stored in ``acts``; ``tests`` (scalar fields) decide solenoidality.
    """
    if not l > 0:
        raise ValueError("horizon must be positive")
    cfg = _flow_config(l, dt, flow)
    if len(mu) == 0:
        return CurveMeasure.empty(mu.n, l, {"eps": eps, "grid": grid, "var_mu": 0.0, "var_mollified": 0.0,
                                            "rho_mass": 0.0, "seeds": 0, "dictionary": VERSION})
    stests, vdict = default_dictionaries(mu, eps)
    tests = stests if tests is None else tests
    dictionary = vdict if dictionary is None else dictionary
    if check:
        r = divergence_residual(mu, tests)
        if r > tol:
            raise NotSolenoidal(f"divergence residual {r:.3g} exceeds {tol:g}; use the general pipeline")
    mc = MollifiedCharge(mu, Mollifier(mu.n, eps))
    seeds = seed_quadrature(mc, grid, z_grid, jitter_seed)
    return _run(mc, seeds, cfg, dictionary, keep_curves, chunk,
                {"eps": eps, "grid": grid, "z_grid": seeds.hz, "dt": cfg.step, "var_mu": mu.variation})


def _run(mc, seeds: SeedQuadrature, cfg: FlowConfig, dictionary, keep_curves, chunk, info) -> CurveMeasure:
    l, steps = cfg.t_max, cfg.steps
    eps = mc.J.eps
    far_tol = eps + seeds.h
    support = lambda p: mc.near_support(p, far_tol)
    col = _Collector(keep_curves)
    var_moll = 0.0
    size = _chunk_size(steps, chunk)
    for s in range(0, len(seeds), size):
        P = seeds.points[s:s + size]
        m = seeds.masses[s:s + size]
        samples, vels = integrate_batch(P, mc.direction, l, steps, cfg.speed_tol)
        var_moll += float(m @ np.linalg.norm(vels[:, 0], axis=1))
        stats, acts = _curve_stats(samples, vels, l, dictionary, support)
        col.add(m / l, samples, vels, l, stats, acts)
    info = dict(info, pipeline="solenoidal", rho_mass=seeds.total, var_mollified=var_moll, seeds=len(seeds), dictionary=VERSION,
                far_tol=far_tol)
    return col.measure(l, mc.n, tuple(getattr(f, "name", "") for f in dictionary), info)


@dataclass
class RefineStep:
    eps: float
    measure: CurveMeasure
    diagnostics: dict


def refine_epsilon(mu: DiscreteCharge, l: float, schedule, grid, dt: float, *, dictionary=None,
                   keep_curves: bool = False, **kw) -> list[RefineStep]:
    """Decompose along a decreasing eps schedule, scoring against mu itself.

    ``grid`` is a step or a list of steps (one per eps).
    """
    schedule = [float(e) for e in schedule]
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly decreasing")
    grids = list(grid) if np.iterable(grid) else [float(grid)] * len(schedule)
    if len(grids) != len(schedule):
        raise ValueError("one grid step per eps")
    if dictionary is None and len(mu):
        dictionary = default_dictionaries(mu, max(schedule))[1]
    out = []
    for eps, g in zip(schedule, grids):
        nu = decompose_solenoidal(mu, l, eps, g, dt=dt, dictionary=dictionary, keep_curves=keep_curves, **kw)
        diag = {"error_vs_mu": pairing_error(mu, nu, dictionary),
                "mass_rel_err": _rel(l * nu.total, mu.variation)}
        out.append(RefineStep(eps, nu, diag))
    return out


# --- verification ----------------------------------------------------------------------

def _rel(a, b):
    return abs(a - b) / b if b else abs(a - b)


def _sup(phi):
    return float(getattr(phi, "sup", 1.0))


def _stacked(curves, size):
    """Yield (samples, velocities) arrays for consecutive blocks of equal-grid curves."""
    for s in range(0, len(curves), size):
        block = curves[s:s + size]
        yield np.stack([c.samples for c in block]), np.stack([c.velocities for c in block])


def _recompute(nu: CurveMeasure, dictionary, support=None):
    """Statistics and pairings of stored curves, in blocks."""
    parts = {k: [] for k in STAT_KEYS}
    acts = []
    size = _chunk_size(nu.curves[0].M, None)
    for S, V in _stacked(nu.curves, size):
        st, a = _curve_stats(S, V, nu.l, dictionary, support)
        acts.append(a)
        for k in STAT_KEYS:
            parts[k].append(st[k])
    return {k: np.concatenate(v) for k, v in parts.items()}, np.concatenate(acts)


def curve_acts(nu: CurveMeasure, dictionary) -> np.ndarray:
    """(K, D) pairings, recomputed from curves when present."""
    names = tuple(getattr(f, "name", "") for f in dictionary)
    if nu.curves is not None:
        if not nu.curves:
            return np.zeros((0, len(dictionary)))
        return _recompute(nu, dictionary)[1]
    if nu.acts is None or names != tuple(nu.act_names):
        raise ValueError("measure has no curves and no stored pairings for this dictionary")
    return nu.acts


def pairing_errors(target, nu: CurveMeasure, dictionary) -> np.ndarray:
    """|<target, Phi> - sum w act(gamma, Phi)| / (sup|Phi| var(mu)) per field."""
    mu = target.mu if isinstance(target, MollifiedCharge) else target
    var = mu.variation
    if var == 0 and len(nu) == 0:
        return np.zeros(len(dictionary))
    acts = curve_acts(nu, dictionary)
    rec = nu.weights @ acts if len(nu) else np.zeros(len(dictionary))
    exact = np.array([target.pair(phi) for phi in dictionary])
    scale = np.array([_sup(phi) for phi in dictionary]) * (var if var > 0 else 1.0)
    return np.abs(rec - exact) / scale


def pairing_error(target, nu, dictionary) -> float:
    e = pairing_errors(target, nu, dictionary)
    return float(e.max()) if e.size else 0.0


def _measure_stats(nu: CurveMeasure, mc: MollifiedCharge | None, far_tol: float | None):
    if nu.curves is None:
        return nu.stats
    if not nu.curves:
        return {k: np.zeros(0) for k in STAT_KEYS}
    support = (lambda p: mc.near_support(p, far_tol)) if mc is not None else None
    return _recompute(nu, [], support)[0]


@dataclass
class VerificationReport:
    checks: dict

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def failing(self):
        return [k for k, c in self.checks.items() if not c["passed"]]

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": self.checks}


def verify_decomposition(target, nu: CurveMeasure, dictionary=None, *, eps: float | None = None,
                         grid: float | None = None, var_estimate: float | None = None,
                         tolerances: dict | None = None) -> VerificationReport:
    """The four checks of the decomposition plus speed and horizontality.

    ``target`` is mu or a MollifiedCharge J * mu.  ``var_estimate`` is the
    variation of the target measure used by the variation check; by default
    it is taken from the run info, or var(mu) for a bare charge.
    """
    tol = dict(DEFAULT_TOLERANCES, **(tolerances or {}))
    mu = target.mu if isinstance(target, MollifiedCharge) else target
    if len(nu) and nu.n != mu.n:
        raise ValueError(f"measure lives in H^{nu.n} but the charge in H^{mu.n}")
    eps = eps if eps is not None else (target.J.eps if isinstance(target, MollifiedCharge) else nu.info.get("eps"))
    grid = grid if grid is not None else nu.info.get("grid", 0.0)
    var_mu = mu.variation
    if dictionary is None:
        dictionary = default_dictionaries(mu, eps or 0.0)[1] if len(mu) else []

    checks = {}

    general = nu.info.get("pipeline") == "general"

    def put(name, value, extra=None, applicable=True):
        ok = bool(value <= tol[name]) or not applicable
        checks[name] = {"value": float(value), "tol": float(tol[name]), "passed": ok}
        if not applicable:
            checks[name]["applicable"] = False
        if extra:
            checks[name].update(extra)

    if general:
        # the lifted run carries the mass identity: l (kept + dropped) = var(mu+)
        ref = float(nu.info["var_lifted"])
        mass = nu.l * (nu.total + float(nu.info.get("dropped_mass", 0.0)))
    else:
        ref = var_mu
        mass = nu.l * nu.total
    put("mass_identity", _rel(mass, ref) if ref else mass, {"l_total": mass, "var_estimate": ref})

    errs = pairing_errors(target, nu, dictionary) if dictionary else np.zeros(0)
    put("pairing", errs.max() if errs.size else 0.0, {"per_field": [float(e) for e in errs]})

    if var_estimate is None:
        var_estimate = nu.info.get("var_mollified", var_mu) if isinstance(target, MollifiedCharge) else var_mu
    mc = None
    if len(mu) and eps:
        mc = target if isinstance(target, MollifiedCharge) else MollifiedCharge(mu, Mollifier(mu.n, eps))
    far_tol = (eps or 0.0) + (grid or 0.0)
    stats = _measure_stats(nu, mc, far_tol if mc is not None else None)
    w = nu.weights
    varsum = float(w @ stats["variation"]) if len(nu) else 0.0
    put("variation", _rel(varsum, var_estimate) if var_estimate else varsum,
        {"weighted_variation": varsum, "var_estimate": float(var_estimate)})

    tot = nu.total
    put("support", float(w @ stats["far"]) / tot if tot > 0 else 0.0, {"far_tol": far_tol})
    # projected curves rest outside their plane contact, so unit speed is not expected
    put("speed", float(w @ stats["slow"]) / tot if tot > 0 else 0.0, applicable=not general, extra=
        {"max_speed": float(stats["speed_max"].max()) if len(nu) else 0.0,
         "mean_length_over_l": float(w @ stats["length"]) / (tot * nu.l) if tot > 0 else 0.0})
    put("contact", float(stats["contact"].max()) if len(nu) else 0.0)
    return VerificationReport(checks)


# --- lifting ------------------------------------------------------------------------------

def embed(points, t) -> np.ndarray:
    """E((x, y, z), t) = (x, t, y, 0, z) from H^n x R into H^(n+1)."""
    p = np.asarray(points, dtype=float)
    n = (p.shape[-1] - 1) // 2
    t = np.broadcast_to(np.asarray(t, dtype=float), p.shape[:-1])
    zero = np.zeros(p.shape[:-1])
    return np.concatenate([p[..., :n], t[..., None], p[..., n:2 * n], zero[..., None], p[..., -1:]], axis=-1)


def embed_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = v.shape[-1] // 2
    zero = np.zeros(v.shape[:-1] + (1,))
    return np.concatenate([v[..., :n], zero, v[..., n:], zero], axis=-1)


def project(points) -> np.ndarray:
    """pi(x, x', y, y', z) = (x, y, z), the left inverse of E(., 0)."""
    p = np.asarray(points, dtype=float)
    m = (p.shape[-1] - 1) // 2
    n = m - 1
    return np.concatenate([p[..., :n], p[..., m:m + n], p[..., -1:]], axis=-1)


def project_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    m = v.shape[-1] // 2
    return np.concatenate([v[..., :m - 1], v[..., m:2 * m - 1]], axis=-1)


@dataclass
class LiftedCharge:
    base: DiscreteCharge
    l: float
    charge: DiscreteCharge  # on H^(n+1)
    divergence_atoms: list
    plane_atoms: int  # atoms of mu at height 0 (the first block of charge)


def lift_charge(mu: DiscreteCharge, divergence_atoms, l: float, nodes: int | None = None) -> LiftedCharge:
    """mu+ = (mu x (delta_0 - delta_l), -div mu x H^1|[0, l], 0) as atoms in H^(n+1).

    ``divergence_atoms`` lists (x, m) with div_H mu = sum m delta_x, where
    <div_H mu, f> = -<mu, grad_H f>.  Each contributes ``nodes`` Gauss-Legendre
    atoms along t -> E(x, t) with X_(n+1) coefficient -m times the weight.
    """
    if not l > 0:
        raise ValueError("horizon must be positive")
    n = mu.n
    atoms = [(np.asarray(x, dtype=float), float(m)) for x, m in divergence_atoms]
    for x, _ in atoms:
        if x.shape != (2 * n + 1,):
            raise ValueError(f"divergence atom has length {x.shape[-1]}, expected {2 * n + 1}")
    nodes = nodes or max(32, math.ceil(40 * l))
    pts = [embed(mu.points, 0.0), embed(mu.points, l)]
    vec = [embed_vector(mu.vectors), -embed_vector(mu.vectors)]
    if atoms:
        g, gw = np.polynomial.legendre.leggauss(nodes)
        t = 0.5 * l * (g + 1.0)
        wt = 0.5 * l * gw
        for x, m in atoms:
            if m == 0:
                continue
            pts.append(embed(np.broadcast_to(x, (nodes, 2 * n + 1)), t))
            v = np.zeros((nodes, 2 * n + 2))
            v[:, n] = -m * wt
            vec.append(v)
    charge = DiscreteCharge(np.concatenate(pts), np.concatenate(vec), n + 1)
    return LiftedCharge(mu, float(l), charge, atoms, len(mu))


def lifted_tests(lifted: LiftedCharge, eps: float):
    """Scalar dictionary for mu+, plus a copy shifted along the lift height.

    The plain dictionary is even in the height about the slab centre, which
    hides a flipped divergence sign; the shifted copy is not.
    """
    box = Box.around(lifted.charge.points, eps)
    n = lifted.base.n
    c = box.center.copy()
    c[n] += 0.5 * max(box.half[n], eps)
    return scalar_dictionary(box) + scalar_dictionary(Box(c, box.half, box.half_z))


def clip_and_project(samples, vels, l: float, band: float):
    """Clamp a lifted curve to its plane contact [alpha, beta] and project to H^n.

    Returns (samples, velocities, alpha index, beta index).  The projected
    curve is pi(gamma+(max(alpha, min(t, beta)))): constant outside
    [alpha, beta] with zero velocity there, and z is re-derived from the
    area rule so the result is exactly horizontal.
    """
    contact = np.abs(samples[:, samples.shape[1] // 2 - 1]) <= band
    if not contact.any():
        raise NoPlaneContact("curve never meets the plane")
    a = int(np.argmax(contact))
    b = len(contact) - 1 - int(np.argmax(contact[::-1]))
    return _clip_batch(samples[None], vels[None], l, np.array([a]), np.array([b])) + (a, b)


def _clip_batch(samples, vels, l, a, b):
    S, M1, _ = samples.shape
    k = np.clip(np.arange(M1)[None, :], a[:, None], b[:, None])
    rows = np.arange(S)[:, None]
    ps = project(samples[rows, k])
    pv = project_vector(vels) * ((np.arange(M1)[None, :] >= a[:, None]) & (np.arange(M1)[None, :] <= b[:, None]))[..., None]
    dt = l / (M1 - 1)
    h = ps[:, :, :-1]
    inc = hermite_area_increment(h[:, :-1], h[:, 1:], pv[:, :-1], pv[:, 1:], dt)
    z0 = samples[np.arange(S), a, -1]
    ps[:, :, -1] = z0[:, None] + np.concatenate([np.zeros((S, 1)), np.cumsum(inc, axis=1)], axis=1)
    return ps, pv


def decompose_general(mu: DiscreteCharge, divergence_atoms, l: float, eps: float, grid: float,
                      flow: FlowConfig | None = None, *, dt: float | None = None, z_grid: float | None = None,
                      contact_band: float | None = None, vertical_threshold: float = 0.9,
                      lift_nodes: int | None = None, dictionary=None, keep_curves: bool = True,
                      tol: float = 1e-3, chunk: int | None = None, jitter_seed: int | None = None) -> CurveMeasure:
    """Decompose a charge with measure divergence through its solenoidal lift.

    Lifted curves that touch {|x_(n+1)| <= contact_band} (default eps) are
    clamped to their first and last contact, projected and re-lifted in H^n.
    The others are dropped and counted in ``info``.
    """
    cfg = _flow_config(l, dt, flow)
    if len(mu) == 0 and not divergence_atoms:
        return CurveMeasure.empty(mu.n, l, {"eps": eps, "grid": grid, "var_mu": 0.0})
    band = eps if contact_band is None else float(contact_band)
    lifted = lift_charge(mu, divergence_atoms, l, lift_nodes)
    mup = lifted.charge
    n = mu.n
    tests_plus = lifted_tests(lifted, eps)
    r = divergence_residual(mup, tests_plus)
    if r > tol:
        raise NotSolenoidal(f"lifted divergence residual {r:.3g} exceeds {tol:g}; check the divergence atoms")
    if dictionary is None:
        dictionary = default_dictionaries(mu, eps)[1] if len(mu) else []
    mcp = MollifiedCharge(mup, Mollifier(n + 1, eps))
    seeds = seed_quadrature(mcp, grid, z_grid, jitter_seed)
    mc = MollifiedCharge(mu, Mollifier(n, eps)) if len(mu) else None
    far_tol = eps + grid
    support = (lambda p: mc.near_support(p, far_tol)) if mc is not None else None

    steps = cfg.steps
    col = _Collector(keep_curves)
    dropped = dropped_mass = 0.0
    plus_total = kept_total = clipped_out = 0.0
    vert_num = vert_den = 0.0
    size = _chunk_size(steps, chunk)
    for s in range(0, len(seeds), size):
        P = seeds.points[s:s + size]
        m = seeds.masses[s:s + size]
        samples, vels = integrate_batch(P, mcp.direction, l, steps, cfg.speed_tol)
        w = m / l
        plus_total += float(w.sum())
        height = samples[:, :, n]
        # vertical classification inside the open slab, away from the planes
        inside = (height > band) & (height < l - band)
        vert = np.abs(vels[:, :, n]) >= vertical_threshold
        vert_num += float(w @ np.sum(inside & vert, axis=1))
        vert_den += float(w @ np.sum(inside, axis=1))
        contact = np.abs(height) <= band
        has = contact.any(axis=1)
        dropped += float(np.sum(~has))
        dropped_mass += float(w[~has].sum())
        if not has.any():
            continue
        samples, vels, contact, w = samples[has], vels[has], contact[has], w[has]
        a = np.argmax(contact, axis=1)
        b = steps - np.argmax(contact[:, ::-1], axis=1)
        ps, pv = _clip_batch(samples, vels, l, a, b)
        kept_total += float(w.sum())
        clipped_out += float(w @ (l - (b - a) * (l / steps)))
        stats, acts = _curve_stats(ps, pv, l, dictionary, support)
        col.add(w, ps, pv, l, stats, acts)
    info = {"pipeline": "general", "eps": eps, "grid": grid, "z_grid": seeds.hz, "dt": cfg.step,
            "var_mu": mu.variation, "var_lifted": mup.variation, "lifted_residual": r, "seeds": len(seeds),
            "rho_mass": seeds.total, "lifted_total": plus_total, "kept_total": kept_total,
            "dropped_curves": int(dropped), "dropped_mass": dropped_mass, "contact_band": band,
            "vertical_fraction": vert_num / vert_den if vert_den else 1.0,
            "mean_clipped_out": clipped_out / kept_total if kept_total else 0.0,
            "dictionary": VERSION, "far_tol": far_tol}
    return col.measure(l, n, tuple(getattr(f, "name", "") for f in dictionary), info)
