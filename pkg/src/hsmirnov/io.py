"""JSON and CSV exchange formats.

Floats are written with 17 significant digits so every double round-trips;
non-finite values use the strings "inf", "-inf" and "nan".  The stdlib
encoder offers no control over float formatting, hence the small writer.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .calculus import DiscreteCharge

INF_SENTINELS = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _encode(obj, out: list, indent: str, level: int):
    pad = "\n" + indent * (level + 1) if indent else ""
    end = "\n" + indent * level if indent else ""
    sep = "," if indent else ", "
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(sep)
            out.append(pad + json.dumps(str(k)) + ": ")
            _encode(v, out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        if isinstance(obj, np.ndarray):
            obj = obj.tolist()
        if not obj:
            out.append("[]")
            return
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            # numeric rows stay on one line
            out.append("[" + ", ".join(_scalar(v) for v in obj) + "]")
            return
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(sep)
            out.append(pad)
            _encode(v, out, indent, level + 1)
        out.append(end + "]")
    else:
        out.append(_scalar(obj))


def _scalar(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(obj, indent: int | None = 1) -> str:
    out: list[str] = []
    _encode(obj, out, " " * indent if indent else "", 0)
    return "".join(out) + "\n"


def write_json(path, obj, indent: int | None = 1):
    Path(path).write_text(dumps(obj, indent))


def _revive(obj):
    if isinstance(obj, dict):
        return {k: _revive(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_revive(v) for v in obj]
    if isinstance(obj, str) and obj in INF_SENTINELS:
        return INF_SENTINELS[obj]
    return obj


def read_json(path):
    """Parse JSON; the sentinels "inf", "-inf", "nan" come back as floats."""
    with open(path) as fh:
        return _revive(json.load(fh))


# --- charges -----------------------------------------------------------------------

def charge_to_json(mu: DiscreteCharge, divergence=None) -> dict:
    out = {"n": mu.n, "atoms": [{"point": p.tolist(), "vector": v.tolist()} for p, v in mu.atoms()]}
    if divergence is not None:
        out["divergence"] = [{"point": np.asarray(x, dtype=float).tolist(), "mass": float(m)} for x, m in divergence]
    return out


def charge_from_json(data: dict):
    """(DiscreteCharge, divergence atoms or None); raises ValueError naming the field."""
    if not isinstance(data, dict):
        raise ValueError("charge: top level must be an object")
    if "n" not in data:
        raise ValueError("charge: missing field 'n'")
    n = data["n"]
    if not isinstance(n, int) or n < 1:
        raise ValueError("charge.n: must be a positive integer")
    atoms = data.get("atoms", [])
    if not isinstance(atoms, list):
        raise ValueError("charge.atoms: must be a list")
    pts, vec = [], []
    for i, a in enumerate(atoms):
        try:
            p = np.asarray(a["point"], dtype=float)
            v = np.asarray(a["vector"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"charge.atoms[{i}]: needs numeric 'point' and 'vector' ({exc})") from None
        if p.shape != (2 * n + 1,):
            raise ValueError(f"charge.atoms[{i}].point: expected {2 * n + 1} numbers, got {p.size}")
        if v.shape != (2 * n,):
            raise ValueError(f"charge.atoms[{i}].vector: expected {2 * n} numbers, got {v.size}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
            raise ValueError(f"charge.atoms[{i}]: values must be finite")
        pts.append(p)
        vec.append(v)
    mu = DiscreteCharge(np.array(pts).reshape(-1, 2 * n + 1), np.array(vec).reshape(-1, 2 * n), n)
    div = None
    if "divergence" in data:
        div = []
        for i, a in enumerate(data["divergence"]):
            try:
                p = np.asarray(a["point"], dtype=float)
                m = float(a["mass"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"charge.divergence[{i}]: needs 'point' and 'mass' ({exc})") from None
            if p.shape != (2 * n + 1,):
                raise ValueError(f"charge.divergence[{i}].point: expected {2 * n + 1} numbers")
            div.append((p, m))
    return mu, div


# --- CSV ----------------------------------------------------------------------------

def _coord_names(n: int):
    return [f"x{j + 1}" for j in range(n)] + [f"y{j + 1}" for j in range(n)] + ["z"]


def write_trajectory_csv(path, curve):
    """Rows t, x1..xn, y1..yn, z."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + _coord_names(curve.n))
        for t, p in zip(curve.times, curve.samples):
            w.writerow([format(float(t), ".17g")] + [format(float(c), ".17g") for c in p])


def write_measure_csv(path, nu):
    """Rows curve, weight, t, x1..xn, y1..yn, z for every curve of ``nu``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve", "weight", "t"] + _coord_names(nu.n))
        for k, (c, wt) in enumerate(nu.entries):
            ws = format(float(wt), ".17g")
            for t, p in zip(c.times, c.samples):
                w.writerow([k, ws, format(float(t), ".17g")] + [format(float(v), ".17g") for v in p])
