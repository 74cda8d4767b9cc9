"""Brackets for the Carnot-Caratheodory distance.

The candidate curves are horizontal lifts of circular arcs.  An arc with chord
``d`` and half turning angle ``theta`` has length ``d theta / sin theta`` and
sweeps the signed area ``d^2 (2 theta - sin 2 theta) / (8 sin^2 theta)``
between chord and arc, which is exactly the vertical gain of its lift.  Length
minimisers of the Heisenberg group are lifts of such arcs, and the unitary
group acts by isometries fixing the identity, so the search reduces to the
chord length ``|h|`` of p^-1 q for every n.
"""
from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .group import as_point, group_inv, group_mul, homogeneous_norm

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class Bracket(NamedTuple):
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def arc_area(theta, d=1.0):
    """Vertical gain of the lifted arc with chord ``d`` and half angle ``theta``."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 1e-4
    s = np.sin(np.where(small, 1.0, theta))
    exact = (2 * theta - np.sin(2 * theta)) / (8 * s * s)
    series = theta / 6 + theta ** 3 / 45
    return d * d * np.where(small, series, exact)


def arc_length(theta, d=1.0):
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 1e-6
    s = np.sin(np.where(small, 1.0, theta))
    return d * np.where(small, 1.0 + theta ** 2 / 6, theta / s)


def _golden_min(f, a, b, tol):
    c = b - _GOLDEN * (b - a)
    e = a + _GOLDEN * (b - a)
    fc, fe = f(c), f(e)
    while b - a > tol:
        if fc < fe:
            b, e, fe = e, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + _GOLDEN * (b - a)
            fe = f(e)
    return a, b


def cc_distance_estimate(p, q, tol: float = 1e-8, theta_max: float = np.pi - 1e-9) -> Bracket:
    """Bracket [lower, upper] for d_CC(p, q).

    The upper bound is the length of an actual horizontal curve reaching
    p^-1 q: the best arc found by golden-section search on the half angle,
    closed up by a small full-circle loop that supplies the leftover vertical
    gain.  The lower bound is the arc length at the left end of the final
    search interval, valid because arc length and area both increase with the
    angle.
    """
    g = group_mul(group_inv(as_point(p)), as_point(q))
    d = float(np.linalg.norm(g[:-1]))
    c = abs(float(g[-1]))
    if d == 0.0:
        v = float(2.0 * np.sqrt(np.pi * c))
        return Bracket(v, v)
    if c == 0.0:
        return Bracket(d, d)
    a, b = _golden_min(lambda t: abs(float(arc_area(t, d)) - c), 0.0, theta_max, tol)
    if float(arc_area(b, d)) < c:
        # the target needs more area than the search range reaches
        lo = float(arc_length(b, d))
        return Bracket(lo, lo + float(2.0 * np.sqrt(np.pi * (c - float(arc_area(b, d))))))
    lo = float(arc_length(a, d))
    gap = max(0.0, c - float(arc_area(a, d)))
    return Bracket(lo, lo + float(2.0 * np.sqrt(np.pi * gap)))


@lru_cache(maxsize=None)
def bilipschitz_constants(samples: int = 20001) -> tuple[float, float]:
    """(m, M) with m ||p^-1 q|| <= d_CC(p, q) <= M ||p^-1 q||.

    The ratio of length to homogeneous norm is scale free, so it is scanned
    along the arc family with unit chord, with the full circle as the limit.
    """
    theta = np.linspace(0.0, np.pi - 1e-3, samples)
    area = arc_area(theta)
    ratio = arc_length(theta) / (1.0 + area ** 2) ** 0.25
    circle = 2.0 * np.sqrt(np.pi)
    return float(min(ratio.min(), circle)), float(max(ratio.max(), circle))


def norm_bracket(p, q) -> Bracket:
    """Bracket from the bilipschitz constants only."""
    m, big = bilipschitz_constants()
    r = float(homogeneous_norm(group_mul(group_inv(as_point(p)), as_point(q))))
    return Bracket(m * r, big * r)
