"""Heisenberg group arithmetic in real coordinates (x_1..x_n, y_1..y_n, z).

Points are numpy arrays whose last axis has length 2n+1.  Every function
broadcasts over leading axes.  The group law uses the half convention

    (x, y, z) . (x', y', z') = (x + x', y + y', z + z' + (<x, y'> - <y, x'>) / 2)

which matches the left-invariant frame X_i = d/dx_i - y_i/2 d/dz,
Y_i = d/dy_i + x_i/2 d/dz.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class _Infinity:
    """The point at infinity of the compactified group."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def as_point(p, n: int | None = None) -> np.ndarray:
    """Validate and return ``p`` as a float array of points."""
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        raise ValueError("a point needs at least one axis")
    d = p.shape[-1]
    if d < 3 or d % 2 == 0:
        raise ValueError(f"point length must be 2n+1 with n >= 1, got {d}")
    if n is not None and d != 2 * n + 1:
        raise ValueError(f"expected points of H^{n} (length {2 * n + 1}), got length {d}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


def dim_of(p) -> int:
    """Group index n of a point array."""
    return (np.shape(p)[-1] - 1) // 2


def identity(n: int) -> np.ndarray:
    return np.zeros(2 * n + 1)


def symplectic(a, b):
    """Standard symplectic pairing <a_x, b_y> - <a_y, b_x> of horizontal parts."""
    n = np.shape(a)[-1] // 2
    return np.sum(a[..., :n] * b[..., n:2 * n] - a[..., n:2 * n] * b[..., :n], axis=-1)


def group_mul(p, q) -> np.ndarray:
    p = as_point(p)
    q = as_point(q)
    if p.shape[-1] != q.shape[-1]:
        raise ValueError(f"dimension mismatch: {p.shape[-1]} vs {q.shape[-1]}")
    out = p + q
    out[..., -1] += 0.5 * symplectic(p[..., :-1], q[..., :-1])
    return out


def group_inv(p) -> np.ndarray:
    return -as_point(p)


def dilate(lam: float, p) -> np.ndarray:
    if not lam > 0:
        raise ValueError("dilation factor must be positive")
    p = as_point(p)
    out = lam * p
    out[..., -1] *= lam
    return out


def homogeneous_norm(p) -> np.ndarray:
    """((|h|^2)^2 + z^2)^(1/4)."""
    p = np.asarray(p, dtype=float)
    h2 = np.sum(p[..., :-1] ** 2, axis=-1)
    return (h2 * h2 + p[..., -1] ** 2) ** 0.25


def frame(p) -> np.ndarray:
    """Coordinate columns of X_1..X_n, Y_1..Y_n at ``p``; shape (..., 2n+1, 2n)."""
    p = np.asarray(p, dtype=float)
    n = dim_of(p)
    out = np.zeros(p.shape[:-1] + (2 * n + 1, 2 * n))
    for i in range(n):
        out[..., i, i] = 1.0
        out[..., n + i, n + i] = 1.0
        out[..., -1, i] = -0.5 * p[..., n + i]
        out[..., -1, n + i] = 0.5 * p[..., i]
    return out


def horizontal_to_tangent(p, v) -> np.ndarray:
    """Coordinate tangent vector of the horizontal vector with frame coefficients ``v``."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    n = dim_of(p)
    out = np.concatenate([v, np.zeros(v.shape[:-1] + (1,))], axis=-1)
    out[..., -1] = 0.5 * np.sum(p[..., :n] * v[..., n:] - p[..., n:2 * n] * v[..., :n], axis=-1)
    return out


def exp_horizontal(v) -> np.ndarray:
    """Group exponential of a horizontal vector: the point (v, 0)."""
    v = np.asarray(v, dtype=float)
    return np.concatenate([v, np.zeros(v.shape[:-1] + (1,))], axis=-1)


# --- complex model -------------------------------------------------------

# (x, y, z) -> (x + iy, COMPLEX_SCALE * z) turns the half convention into the
# product (z, t)(z', t') = (z + z', t + t' + 2 Im <z, conj z'>).
COMPLEX_SCALE = -4.0


@dataclass(frozen=True)
class ComplexPoint:
    zc: np.ndarray
    t: float

    def __post_init__(self):
        zc = np.atleast_1d(np.asarray(self.zc, dtype=complex))
        object.__setattr__(self, "zc", zc)
        object.__setattr__(self, "t", float(self.t))
        if not (np.all(np.isfinite(zc)) and np.isfinite(self.t)):
            raise ValueError("complex point must be finite")


@dataclass(frozen=True)
class SpherePoint:
    w: np.ndarray
    w0: complex

    def __post_init__(self):
        object.__setattr__(self, "w", np.atleast_1d(np.asarray(self.w, dtype=complex)))
        object.__setattr__(self, "w0", complex(self.w0))

    def residual(self) -> float:
        """| |w|^2 + |w0|^2 - 1 |."""
        return abs(float(np.sum(np.abs(self.w) ** 2) + abs(self.w0) ** 2) - 1.0)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.w, [self.w0]])


def complex_mul(a: ComplexPoint, b: ComplexPoint) -> ComplexPoint:
    t = a.t + b.t + 2.0 * np.imag(np.sum(a.zc * np.conj(b.zc)))
    return ComplexPoint(a.zc + b.zc, t)


def to_complex_model(p) -> ComplexPoint:
    p = as_point(p)
    if p.ndim != 1:
        raise ValueError("to_complex_model takes a single point")
    n = dim_of(p)
    return ComplexPoint(p[:n] + 1j * p[n:2 * n], COMPLEX_SCALE * p[-1])


def from_complex_model(c: ComplexPoint) -> np.ndarray:
    return np.concatenate([c.zc.real, c.zc.imag, [c.t / COMPLEX_SCALE]])


def siegel_lift(c: ComplexPoint):
    """iota(z, t) = (z, t + i|z|^2), a point of the Siegel domain boundary."""
    return c.zc, c.t + 1j * float(np.sum(np.abs(c.zc) ** 2))


def cayley_forward(c, n: int = 1) -> SpherePoint:
    """Map a point of the complex model (or INFINITY) to the unit sphere of C^(n+1).

    Computed as the inverse Cayley transform of the Siegel lift,
    (zeta, zeta0) -> (2 zeta / (zeta0 + i), (i - zeta0) / (zeta0 + i)).
    INFINITY goes to the south pole (0, -1); ``n`` only sizes that case.
    """
    if c is INFINITY:
        return cayley_infinity(n)
    zeta, zeta0 = siegel_lift(c)
    den = zeta0 + 1j
    return SpherePoint(2.0 * zeta / den, (1j - zeta0) / den)


def cayley_infinity(n: int) -> SpherePoint:
    return SpherePoint(np.zeros(n, dtype=complex), -1.0)


def cayley_inverse(s: SpherePoint, pole_tol: float = 0.0):
    """Inverse of :func:`cayley_forward`; the south pole (0, -1) maps to INFINITY."""
    one_plus = 1.0 + s.w0
    if abs(one_plus) <= pole_tol or one_plus == 0:
        return INFINITY
    d = 2j / one_plus
    return ComplexPoint(1j * s.w / one_plus, d.real)


def cayley_point(p) -> SpherePoint:
    """Sphere image of a real-coordinate point."""
    return cayley_forward(to_complex_model(p))


def sphere_image(points) -> np.ndarray:
    """Cayley images of a point array as complex vectors (..., n+1)."""
    p = np.asarray(points, dtype=float)
    n = dim_of(p)
    zc = p[..., :n] + 1j * p[..., n:2 * n]
    zeta0 = COMPLEX_SCALE * p[..., -1] + 1j * np.sum(np.abs(zc) ** 2, axis=-1)
    den = zeta0 + 1j
    return np.concatenate([2.0 * zc / den[..., None], ((1j - zeta0) / den)[..., None]], axis=-1)
