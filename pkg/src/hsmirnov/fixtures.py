"""Reference charges and preset fields used by the tests, the CLI and the docs."""
from __future__ import annotations

import numpy as np

from .calculus import DiscreteCharge, HVectorField, Mollifier, MollifiedCharge
from .group import group_mul, symplectic


def figure_eight(atoms: int = 400, R: float = 0.5) -> DiscreteCharge:
    """Closed horizontal lift of the Gerono lemniscate (R sin t, R sin t cos t).

    The planar loop encloses zero signed area, so its lift closes:
    z(t) = -(R^2 / 2)(-cos t + cos^3 t / 3 + 2/3).  Atoms sit at the midpoints
    t_k = 2 pi (k + 1/2) / N with vectors gamma'(t_k) 2 pi / N, a discrete
    solenoidal charge of variation about the curve length.
    """
    t = 2 * np.pi * (np.arange(atoms) + 0.5) / atoms
    c, s = np.cos(t), np.sin(t)
    pts = np.stack([R * s, R * s * c, -(R * R / 2) * (-c + c ** 3 / 3 + 2.0 / 3.0)], axis=1)
    vec = np.stack([R * c, R * np.cos(2 * t)], axis=1) * (2 * np.pi / atoms)
    return DiscreteCharge(pts, vec)


def segment(a, b, nodes: int = 24) -> DiscreteCharge:
    """Charge of the horizontal segment a -> b, by Gauss-Legendre nodes.

    ``b`` must lie on the horizontal line through ``a``, that is
    b = a . (w, 0) with w the horizontal displacement.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w = b[:-1] - a[:-1]
    if abs(a[-1] + 0.5 * symplectic(a[:-1], w) - b[-1]) > 1e-12 * max(1.0, abs(b[-1])):
        raise ValueError("endpoints are not joined by a horizontal straight segment")
    x, wt = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (x + 1.0)
    steps = np.concatenate([s[:, None] * w, np.zeros((nodes, 1))], axis=1)
    pts = group_mul(a[None], steps)
    return DiscreteCharge(pts, 0.5 * wt[:, None] * w[None])


def dipole(a=(-0.5, 0.0, 0.0), b=(0.5, 0.0, 0.0), nodes: int = 24):
    """Segment charge a -> b with its divergence atoms [(a, +1), (b, -1)]."""
    mu = segment(a, b, nodes)
    return mu, [(np.asarray(a, dtype=float), 1.0), (np.asarray(b, dtype=float), -1.0)]


def planar_annulus(n_r: int = 10, n_theta: int = 40, r0: float = 1.0, r1: float = 2.0) -> DiscreteCharge:
    """Rotational atoms (-y, x)/r times cell area on a polar grid in the plane z = 0.

    The circles are not horizontal closed curves in the group, so this charge
    is not solenoidal; it serves as a negative control.
    """
    dr = (r1 - r0) / n_r
    dth = 2 * np.pi / n_theta
    r = r0 + (np.arange(n_r) + 0.5) * dr
    th = (np.arange(n_theta) + 0.5) * dth
    R, T = np.meshgrid(r, th, indexing="ij")
    R, T = R.ravel(), T.ravel()
    pts = np.stack([R * np.cos(T), R * np.sin(T), np.zeros_like(R)], axis=1)
    vec = np.stack([-np.sin(T), np.cos(T)], axis=1) * (R * dr * dth)[:, None]
    return DiscreteCharge(pts, vec)


def single_atom(n: int = 1) -> DiscreteCharge:
    v = np.zeros(2 * n)
    v[0] = 1.0
    return DiscreteCharge(np.zeros((1, 2 * n + 1)), v[None])


# --- preset fields ------------------------------------------------------------------

def rotational_field(n: int = 1) -> HVectorField:
    """(-y, x) in every (x_j, y_j) plane; growth constant 1."""
    def f(p):
        p = np.asarray(p, dtype=float)
        return np.concatenate([-p[..., n:2 * n], p[..., :n]], axis=-1)
    return HVectorField(f, n, growth_bound=1.0, name="rotational")


def constant_field(coeffs) -> HVectorField:
    c = np.asarray(coeffs, dtype=float)
    n = len(c) // 2
    if len(c) != 2 * n or n < 1:
        raise ValueError("constant field needs 2n coefficients")
    return HVectorField(lambda p: np.broadcast_to(c, np.shape(p)[:-1] + c.shape).copy(), n,
                        growth_bound=float(np.linalg.norm(c)), name="constant")


def linear_field(A, b=None) -> HVectorField:
    """phi(p) = A p + b with A of shape (2n, 2n+1)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0] // 2
    if A.shape != (2 * n, 2 * n + 1):
        raise ValueError("coefficient table must have shape (2n, 2n+1)")
    b = np.zeros(2 * n) if b is None else np.asarray(b, dtype=float)
    if b.shape != (2 * n,):
        raise ValueError("offset must have length 2n")
    # ||A p|| <= |A| (|h| + |z|) <= |A| (||p|| + ||p||^2) is not linear; only the
    # horizontal block gives a linear growth constant
    c = None if np.any(A[:, -1]) else float(np.linalg.norm(A, 2) + np.linalg.norm(b))
    return HVectorField(lambda p: np.asarray(p, dtype=float) @ A.T + b, n, growth_bound=c, name="linear")


def dipole_field(eps: float = 0.1) -> HVectorField:
    """Mollified direction field of the unit dipole segment."""
    mu, _ = dipole()
    return MollifiedCharge(mu, Mollifier(1, eps)).field()


PRESETS = {"rotational": rotational_field, "constant": constant_field, "dipole": dipole_field}
