"""Command-line front end.

    hsmirnov decompose --config run.json --charge charge.json [--general] [--out DIR]
    hsmirnov verify --curves DIR/curves.json --charge charge.json --config run.json
    hsmirnov flow --config run.json --field field.json --seeds seeds.json [--out DIR]

Exit codes: 0 pass, 1 input error, 2 wrong pipeline (charge not solenoidal),
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import io
from .calculus import MollifiedCharge, Mollifier
from .decomposition import (DEFAULT_TOLERANCES, CurveMeasure, NotSolenoidal, decompose_general,
                            decompose_solenoidal, lift_charge, refine_epsilon, verify_decomposition)
from .fixtures import PRESETS, linear_field
from .flow import FlowConfig, SpeedBoundError, gronwall_certificate, gronwall_rate, integrate
from .seeds import seed_quadrature

EXIT_OK, EXIT_INPUT, EXIT_PIPELINE, EXIT_VERIFY = 0, 1, 2, 3


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    n: int = 1
    l: float = 1.0
    eps: float = 0.1
    eps_schedule: list | None = None
    grid: float = 0.04
    z_grid: float | None = None
    dt: float = 0.02
    solenoidal_tol: float = 1e-3
    contact_band: float | None = None
    vertical_threshold: float = 0.9
    jitter_seed: int | None = None
    tolerances: dict = field(default_factory=dict)
    out: str = "out"

    def validate(self):
        positive = {"l": self.l, "eps": self.eps, "grid": self.grid, "dt": self.dt,
                    "solenoidal_tol": self.solenoidal_tol}
        for k, v in positive.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                raise InputError(f"config.{k}: must be a positive number, got {v!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise InputError(f"config.n: must be a positive integer, got {self.n!r}")
        if self.dt > self.l:
            raise InputError("config.dt: must not exceed config.l")
        for k in ("z_grid", "contact_band"):
            v = getattr(self, k)
            if v is not None and not (isinstance(v, (int, float)) and v > 0):
                raise InputError(f"config.{k}: must be positive or null")
        if self.eps_schedule is not None:
            s = self.eps_schedule
            if not (isinstance(s, list) and s and all(isinstance(e, (int, float)) and e > 0 for e in s)):
                raise InputError("config.eps_schedule: must be a non-empty list of positive numbers")
            if any(b >= a for a, b in zip(s, s[1:])):
                raise InputError("config.eps_schedule: must be strictly decreasing")
        for k in self.tolerances:
            if k not in DEFAULT_TOLERANCES:
                raise InputError(f"config.tolerances.{k}: unknown check (known: {', '.join(DEFAULT_TOLERANCES)})")
        return self

    @classmethod
    def from_json(cls, data) -> "RunConfig":
        if not isinstance(data, dict):
            raise InputError("config: top level must be an object")
        known = {f.name for f in fields(cls)}
        for k in data:
            if k not in known:
                raise InputError(f"config.{k}: unknown field")
        try:
            return cls(**data).validate()
        except TypeError as exc:
            raise InputError(f"config: {exc}") from None

    def to_json(self) -> dict:
        return asdict(self)


def _load_json(path, what):
    try:
        return io.read_json(path)
    except FileNotFoundError:
        raise InputError(f"{what}: file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _load_config(path) -> RunConfig:
    return RunConfig.from_json(_load_json(path, "config")) if path else RunConfig().validate()


def _load_charge(path, cfg: RunConfig):
    try:
        mu, div = io.charge_from_json(_load_json(path, "charge"))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if mu.n != cfg.n:
        raise InputError(f"charge.n = {mu.n} does not match config.n = {cfg.n}")
    return mu, div


def _report(cfg: RunConfig, nu: CurveMeasure, rep, extra=None) -> dict:
    out = {"pipeline": nu.info.get("pipeline", "solenoidal"), "n": cfg.n, "l": cfg.l,
           "eps": nu.info.get("eps", cfg.eps), "grid": cfg.grid, "dt": cfg.dt, "curves": len(nu),
           "total": nu.total, "passed": rep.passed, "checks": rep.checks,
           "info": {k: v for k, v in sorted(nu.info.items())}}
    if extra:
        out.update(extra)
    return out


def _measure_json(nu: CurveMeasure) -> dict:
    data = nu.to_json()
    data["info"] = {k: v for k, v in sorted(nu.info.items())}
    return data


def _set_threads(k):
    if k:
        import numba
        numba.set_num_threads(min(int(k), numba.config.NUMBA_NUM_THREADS))


def cmd_decompose(args) -> int:
    cfg = _load_config(args.config)
    if args.out:
        cfg.out = args.out
    if args.epsilon_schedule:
        try:
            cfg.eps_schedule = [float(e) for e in args.epsilon_schedule.split(",")]
        except ValueError:
            raise InputError("--epsilon-schedule: expected comma separated numbers") from None
        cfg.validate()
    mu, div = _load_charge(args.charge, cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    tol = cfg.tolerances
    extra = {}
    if args.general:
        nu = decompose_general(mu, div or [], cfg.l, cfg.eps, cfg.grid, dt=cfg.dt, z_grid=cfg.z_grid,
                               contact_band=cfg.contact_band, vertical_threshold=cfg.vertical_threshold,
                               tol=cfg.solenoidal_tol, jitter_seed=cfg.jitter_seed)
        target = mu
    else:
        kw = dict(dt=cfg.dt, z_grid=cfg.z_grid, tol=cfg.solenoidal_tol, jitter_seed=cfg.jitter_seed)
        try:
            if cfg.eps_schedule:
                steps = refine_epsilon(mu, cfg.l, cfg.eps_schedule, cfg.grid, keep_curves=True, **kw)
                extra["refinement"] = [dict(eps=s.eps, **s.diagnostics) for s in steps]
                nu = steps[-1].measure
            else:
                nu = decompose_solenoidal(mu, cfg.l, cfg.eps, cfg.grid, **kw)
        except NotSolenoidal as exc:
            print(f"NotSolenoidal: {exc}. Rerun with --general and divergence atoms in the charge file.",
                  file=sys.stderr)
            return EXIT_PIPELINE
        eps = nu.info.get("eps", cfg.eps)
        target = MollifiedCharge(mu, Mollifier(mu.n, eps)) if len(mu) else mu
    rep = verify_decomposition(target, nu, tolerances=tol)
    io.write_json(out / "curves.json", _measure_json(nu))
    io.write_json(out / "report.json", _report(cfg, nu, rep, extra))
    io.write_measure_csv(out / "curves.csv", nu)
    for name in rep.failing():
        print(f"check failed: {name} value={rep.checks[name]['value']:.6g} tol={rep.checks[name]['tol']:g}",
              file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    mu, div = _load_charge(args.charge, cfg)
    data = _load_json(args.curves, "curves")
    try:
        nu = CurveMeasure.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"curves: malformed measure ({exc})") from None
    if len(nu) and nu.n != mu.n:
        raise InputError(f"curves live in H^{nu.n} but the charge in H^{mu.n}")
    info = data.get("info", {})
    nu.info = dict(info)
    eps = float(info.get("eps", cfg.eps))
    grid = float(info.get("grid", cfg.grid))
    if info.get("pipeline") == "general":
        # recompute what the stored curves cannot carry
        lifted = lift_charge(mu, div or [], nu.l)
        nu.info["var_lifted"] = lifted.charge.variation
        target = mu
        var_est = None
    else:
        nu.info["pipeline"] = "solenoidal"
        target = mu
        var_est = None
        if len(mu):
            target = MollifiedCharge(mu, Mollifier(mu.n, eps))
            seeds = seed_quadrature(target, grid, info.get("z_grid"), cfg.jitter_seed)
            var_est = float(seeds.masses @ np.linalg.norm(target.direction(seeds.points), axis=1))
    rep = verify_decomposition(target, nu, eps=eps, grid=grid, var_estimate=var_est, tolerances=cfg.tolerances)
    for name in rep.failing():
        print(f"check failed: {name} value={rep.checks[name]['value']:.6g} tol={rep.checks[name]['tol']:g}",
              file=sys.stderr)
    if rep.passed:
        print("all checks passed")
    return EXIT_OK if rep.passed else EXIT_VERIFY


def _load_field(path, n):
    spec = _load_json(path, "field")
    if not isinstance(spec, dict):
        raise InputError("field: top level must be an object")
    if "linear" in spec:
        tab = spec["linear"]
        try:
            f = linear_field(tab["A"], tab.get("b"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"field.linear: {exc}") from None
    else:
        name = spec.get("preset")
        if name not in PRESETS:
            raise InputError(f"field.preset: expected one of {sorted(PRESETS)} or a 'linear' table, got {name!r}")
        try:
            if name == "rotational":
                f = PRESETS[name](int(spec.get("n", n)))
            elif name == "constant":
                f = PRESETS[name](spec["coefficients"])
            else:
                f = PRESETS[name](float(spec.get("eps", 0.1)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"field: bad parameters for preset {name!r} ({exc})") from None
    if f.n != n:
        raise InputError(f"field lives in H^{f.n} but config.n = {n}")
    return f


def cmd_flow(args) -> int:
    cfg = _load_config(args.config)
    out = Path(args.out or cfg.out)
    phi = _load_field(args.field, cfg.n)
    seeds = _load_json(args.seeds, "seeds")
    try:
        seeds = np.asarray(seeds, dtype=float).reshape(-1, 2 * cfg.n + 1)
    except ValueError:
        raise InputError(f"seeds: expected a list of points with {2 * cfg.n + 1} numbers") from None
    out.mkdir(parents=True, exist_ok=True)
    fc = FlowConfig(cfg.dt, cfg.l)
    report = {"t_max": cfg.l, "dt": fc.step, "field": phi.name, "trajectories": []}
    ok = True
    for k, x in enumerate(seeds):
        try:
            curve = integrate(x, phi, fc)
        except SpeedBoundError as exc:
            print(f"SpeedBound: seed {k}: {exc}", file=sys.stderr)
            return EXIT_VERIFY
        io.write_trajectory_csv(out / f"trajectory_{k}.csv", curve)
        entry = {"seed": x.tolist(), "end": curve.end.tolist(),
                 "contact_residual": float(np.abs(curve.contact_residuals).max())}
        if phi.growth_bound is not None:
            c = phi.growth_bound
            g = gronwall_certificate(curve, c, gronwall_rate(c))
            entry["gronwall"] = {"c": c, "K": g.K, "holds": g.holds, "max_excess": g.max_excess}
            ok &= g.holds
        report["trajectories"].append(entry)
    report["passed"] = ok
    io.write_json(out / "flow_report.json", report)
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hsmirnov", description="Curve decompositions of horizontal charges.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", help="decompose a charge into weighted horizontal curves")
    d.add_argument("--config", help="run configuration JSON")
    d.add_argument("--charge", required=True, help="charge JSON")
    d.add_argument("--general", action="store_true", help="use the lifted pipeline for charges with divergence")
    d.add_argument("--out", help="output directory (overrides config.out)")
    d.add_argument("--epsilon-schedule", help="comma separated decreasing eps values")
    d.add_argument("--threads", type=int, default=None, help="worker threads for compiled kernels")
    d.set_defaults(func=cmd_decompose)

    v = sub.add_parser("verify", help="re-run the verification checks on stored curves")
    v.add_argument("--curves", required=True)
    v.add_argument("--charge", required=True)
    v.add_argument("--config")
    v.add_argument("--threads", type=int, default=None)
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("flow", help="integrate a preset field and emit CSV trajectories")
    f.add_argument("--config")
    f.add_argument("--field", required=True, help="field JSON: {'preset': ...} or {'linear': {'A', 'b'}}")
    f.add_argument("--seeds", required=True, help="JSON list of seed points")
    f.add_argument("--out")
    f.add_argument("--threads", type=int, default=None)
    f.set_defaults(func=cmd_flow)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        _set_threads(args.threads)
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
