"""Fixed test dictionaries (version "v1").

Both dictionaries are built from a box (center, horizontal and vertical half
extents) so the acceptance numbers are stable for a given charge.

* scalar: ten smooth functions with analytic frame gradients (Gaussians and
  polynomial multiples of Gaussians), used for divergence and Liouville tests;
* vector: ten compactly supported horizontal fields, nine of the form
  bump x constant frame direction and one rotational field.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import HVectorField, ScalarField, from_euclidean

VERSION = "v1"


@dataclass(frozen=True)
class Box:
    center: np.ndarray
    half: np.ndarray  # horizontal half extents (2n,)
    half_z: float

    @property
    def n(self) -> int:
        return len(self.half) // 2

    @classmethod
    def around(cls, points, margin: float = 0.0) -> "Box":
        points = np.asarray(points, dtype=float)
        lo, hi = points.min(axis=0), points.max(axis=0)
        half = 0.5 * (hi - lo)
        return cls(0.5 * (lo + hi), half[:-1] + margin, float(half[-1] + margin * margin))


# --- scalar dictionary ----------------------------------------------------------

def _gaussian_family(center, s, sz, poly, poly_grad, name):
    """f = poly(u) G(u) with u = p - center and G an anisotropic Gaussian."""
    center = np.asarray(center, dtype=float)
    inv = np.full(len(center), 1.0 / s ** 2)
    inv[-1] = 1.0 / sz ** 2

    def gauss(p):
        u = p - center
        return u, np.exp(-0.5 * np.sum(u * u * inv, axis=-1))

    def f(p):
        u, g = gauss(p)
        return poly(u) * g

    def egrad(p):
        u, g = gauss(p)
        return (poly_grad(u) - poly(u)[..., None] * u * inv) * g[..., None]

    return from_euclidean(f, egrad, name)


def scalar_dictionary(box: Box) -> list[ScalarField]:
    n = box.n
    d = 2 * n + 1
    s = max(float(box.half.max()), 0.25)
    sz = max(box.half_z, s * s)
    c = box.center

    def shifted(j, a):
        out = c.copy()
        out[j] += a
        return out

    one = lambda u: np.ones(u.shape[:-1])
    zero = lambda u: np.zeros(u.shape)

    def coord(j, scale):
        def poly(u):
            return u[..., j] / scale

        def grad(u):
            g = np.zeros(u.shape)
            g[..., j] = 1.0 / scale
            return g
        return poly, grad

    def product(i, j):
        def poly(u):
            return u[..., i] * u[..., j] / s ** 2

        def grad(u):
            g = np.zeros(u.shape)
            g[..., i] = u[..., j] / s ** 2
            g[..., j] += u[..., i] / s ** 2
            return g
        return poly, grad

    def cosine(j):
        def poly(u):
            return np.cos(u[..., j] / s)

        def grad(u):
            g = np.zeros(u.shape)
            g[..., j] = -np.sin(u[..., j] / s) / s
            return g
        return poly, grad

    fam = [
        _gaussian_family(c, s, sz, one, zero, "gauss center"),
        _gaussian_family(shifted(0, 0.5 * s), s, sz, one, zero, "gauss +x"),
        _gaussian_family(shifted(0, -0.5 * s), s, sz, one, zero, "gauss -x"),
        _gaussian_family(shifted(n, 0.5 * s), s, sz, one, zero, "gauss +y"),
        _gaussian_family(c, s, sz, *coord(0, s), "x gauss"),
        _gaussian_family(c, s, sz, *coord(n, s), "y gauss"),
        _gaussian_family(c, s, sz, *coord(d - 1, sz), "z gauss"),
        _gaussian_family(c, s, sz, *product(0, n), "xy gauss"),
        _gaussian_family(c, 2 * s, 4 * sz, one, zero, "wide gauss"),
        _gaussian_family(c, s, sz, *cosine(0), "cos gauss"),
    ]
    assert len(fam) == 10 and all(f.grad is not None for f in fam)
    return fam


# --- vector dictionary ------------------------------------------------------------

_U = np.linspace(0.0, 1.0, 200001)[:-1]
# sup of u e^(1 - 1/(1 - u^2)) on [0, 1), the rotational field's peak
_ROT_SUP = float(np.max(_U * np.exp(1.0 - 1.0 / (1.0 - _U ** 2))))


@dataclass(frozen=True)
class DictField(HVectorField):
    sup: float = 1.0  # sup norm over the group


def _bump(center, rh, rz):
    """Ellipsoidal bump with peak value 1 (Euclidean radii rh, rz)."""
    center = np.asarray(center, dtype=float)

    def b(p):
        u = p - center
        r2 = np.sum(u[..., :-1] ** 2, axis=-1) / rh ** 2 + u[..., -1] ** 2 / rz ** 2
        out = np.zeros(r2.shape)
        inside = r2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out
    return b


def vector_dictionary(box: Box) -> list[DictField]:
    n = box.n
    rh = 1.25 * float(box.half.max()) + 0.25
    rz = 1.25 * box.half_z + 0.25 ** 2 + 0.5 * rh ** 2
    c = box.center
    dirs = []
    for j in (0, n):
        e = np.zeros(2 * n)
        e[j] = 1.0
        dirs.append(e)
    dirs.append(np.ones(2 * n) / np.sqrt(2 * n))

    bumps = [("center", _bump(c, rh, rz))]
    for sign in (1.0, -1.0):
        cc = c.copy()
        cc[0] += sign * 0.5 * rh
        bumps.append((("+x" if sign > 0 else "-x"), _bump(cc, 0.6 * rh, rz)))

    fields = []
    for label, b in bumps:
        for k, e in enumerate(dirs):
            fields.append(DictField(lambda p, b=b, e=e: b(p)[..., None] * e, n, 1.0,
                                    f"bump {label} dir {k}", 1.0))
    big = bumps[0][1]

    def rot(p):
        u = p[..., :-1] - c[:-1]
        w = np.concatenate([-u[..., n:], u[..., :n]], axis=-1) / rh
        return big(p)[..., None] * w

    fields.append(DictField(rot, n, 1.0, "rotational", _ROT_SUP))
    assert len(fields) == 10
    return fields


def dictionaries_for(points, margin: float):
    box = Box.around(points, margin)
    return scalar_dictionary(box), vector_dictionary(box)
