"""Sampled horizontal curves and the charges they carry.

A curve stores samples and frame-coefficient velocities on a uniform grid.
Between samples it is the horizontal lift of the cubic Hermite interpolant of
the horizontal part, so the z increment of every step is the exact symplectic
area of that interpolant:

    dz_k = 1/2 [ w(h_k, h_k+1) + dt/5 w(dh_k, v_k+1 - v_k) - dt^2/30 w(v_k, v_k+1) ]

with w the symplectic pairing.  The first term alone is the trapezoidal
(chord) rule; the velocity terms make the rule fourth order accurate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import horizontal_gradient
from .group import INFINITY, dim_of, group_inv, group_mul, homogeneous_norm, sphere_image, symplectic

# 3-point Gauss-Legendre on [0, 1]: exact for the degree-5 area integrand
_GL_X = 0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
_GL_W = np.array([5.0, 8.0, 5.0]) / 18.0


def hermite_area_increment(h0, h1, v0, v1, dt):
    """Vertical gain of the lifted cubic Hermite segment from (h0, v0) to (h1, v1)."""
    dh = h1 - h0
    return 0.5 * (symplectic(h0, h1) + dt / 5.0 * symplectic(dh, v1 - v0)
                  - dt * dt / 30.0 * symplectic(v0, v1))


def chord_area_increment(h0, h1):
    """Trapezoidal rule 1/2 sum_j (xbar_j dy_j - ybar_j dx_j) = 1/2 w(h0, h1)."""
    return 0.5 * symplectic(h0, h1)


def _hermite(h0, h1, v0, v1, dt, u):
    u = np.asarray(u, dtype=float)[..., None]
    u2, u3 = u * u, u * u * u
    pos = ((2 * u3 - 3 * u2 + 1) * h0 + (u3 - 2 * u2 + u) * dt * v0
           + (-2 * u3 + 3 * u2) * h1 + (u3 - u2) * dt * v1)
    der = ((6 * u2 - 6 * u) * h0 + (3 * u2 - 4 * u + 1) * dt * v0
           + (-6 * u2 + 6 * u) * h1 + (3 * u2 - 2 * u) * dt * v1)
    return pos, der / dt


class HorizontalCurve:
    """Uniformly sampled horizontal curve on [0, l]."""

    def __init__(self, samples, velocities, l: float):
        samples = np.array(samples, dtype=float)
        velocities = np.array(velocities, dtype=float)
        if samples.ndim != 2 or velocities.ndim != 2 or len(samples) != len(velocities):
            raise ValueError("samples and velocities must be 2-d arrays of equal length")
        if len(samples) < 2:
            raise ValueError("a curve needs at least two samples")
        n = dim_of(samples)
        if samples.shape[1] != 2 * n + 1 or velocities.shape[1] != 2 * n:
            raise ValueError("sample and velocity lengths must be 2n+1 and 2n")
        if not l > 0:
            raise ValueError("horizon must be positive")
        samples.flags.writeable = False
        velocities.flags.writeable = False
        self.samples = samples
        self.velocities = velocities
        self.l = float(l)
        self.n = n

    @property
    def M(self) -> int:
        return len(self.samples) - 1

    @property
    def dt(self) -> float:
        return self.l / self.M

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.l, self.M + 1)

    @property
    def speeds(self) -> np.ndarray:
        return np.linalg.norm(self.velocities, axis=1)

    @property
    def start(self) -> np.ndarray:
        return self.samples[0]

    @property
    def end(self) -> np.ndarray:
        return self.samples[-1]

    @property
    def contact_residuals(self) -> np.ndarray:
        """dz_k minus the Hermite area of step k; zero for exactly horizontal curves."""
        h, z, v = self.samples[:, :-1], self.samples[:, -1], self.velocities
        return np.diff(z) - hermite_area_increment(h[:-1], h[1:], v[:-1], v[1:], self.dt)

    @property
    def chord_residuals(self) -> np.ndarray:
        """dz_k minus the trapezoidal area of step k (second order in dt)."""
        h, z = self.samples[:, :-1], self.samples[:, -1]
        return np.diff(z) - chord_area_increment(h[:-1], h[1:])

    def at(self, t):
        """Point and velocity at times ``t`` on the lifted Hermite interpolant."""
        t = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), 0.0, self.l)
        k = np.minimum((t / self.dt).astype(int), self.M - 1)
        u = t / self.dt - k
        h, v = self.samples[:, :-1], self.velocities
        h0, h1, v0, v1 = h[k], h[k + 1], v[k], v[k + 1]
        pos, vel = _hermite(h0, h1, v0, v1, self.dt, u)
        # z from the exact area of the partial segment [0, u]
        s = u[:, None] * _GL_X[None, :]
        hs, vs = _hermite(h0[:, None], h1[:, None], v0[:, None], v1[:, None], self.dt, s)
        area = 0.5 * self.dt * u * np.sum(_GL_W * symplectic(hs, vs), axis=1)
        z = self.samples[k, -1] + area
        return np.concatenate([pos, z[:, None]], axis=1), vel

    def resample(self, M: int) -> "HorizontalCurve":
        pts, vel = self.at(np.linspace(0.0, self.l, M + 1))
        return HorizontalCurve(pts, vel, self.l)


def trapezoid_weights(M: int, dt: float) -> np.ndarray:
    w = np.full(M + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def length(curve: HorizontalCurve) -> float:
    """Composite trapezoidal quadrature of |velocity|."""
    return float(trapezoid_weights(curve.M, curve.dt) @ curve.speeds)


def act(curve: HorizontalCurve, phi) -> float:
    """<[gamma], Phi> = int <Phi(gamma(t)), gamma'(t)> dt, trapezoidal."""
    integrand = np.sum(phi(curve.samples) * curve.velocities, axis=1)
    return float(trapezoid_weights(curve.M, curve.dt) @ integrand)


def riemann_sum(curve: HorizontalCurve, phi, m: int) -> float:
    """S_m = sum_k <Phi(gamma(t_k)), h(t_k+1) - h(t_k)> over m equal pieces.

    Frame-coefficient increments of the horizontal part are the transported
    increments because the frame is left invariant.  Partitions that do not
    divide the sample grid are evaluated on the Hermite interpolant.
    """
    if m < 1:
        raise ValueError("partition count must be positive")
    if curve.M % m == 0:
        pts = curve.samples[::curve.M // m]
    else:
        pts, _ = curve.at(np.linspace(0.0, curve.l, m + 1))
    dh = np.diff(pts[:, :-1], axis=0)
    return float(np.sum(phi(pts[:-1]) * dh))


def variation(curve: HorizontalCurve, region=None) -> float:
    """Time-weighted speed over samples inside ``region`` (all samples if None)."""
    w = trapezoid_weights(curve.M, curve.dt) * curve.speeds
    if region is None:
        return float(w.sum())
    inside = np.asarray([bool(region(p)) for p in curve.samples])
    return float(w[inside].sum())


def boundary_pairing(curve: HorizontalCurve, psi, h: float = 1e-5) -> float:
    """-<[gamma], grad_H psi>, which should equal psi(gamma(0)) - psi(gamma(l))."""
    return -act(curve, lambda p: horizontal_gradient(psi, p, h))


def d_infinity(c1: HorizontalCurve, c2, compactified: bool = False) -> float:
    """sup_t ||c1(t)^-1 c2(t)||, or the sup chordal distance of Cayley images.

    ``c2`` may be INFINITY, the constant curve at the point at infinity.
    """
    if c2 is INFINITY:
        if not compactified:
            return float("inf")
        img = sphere_image(c1.samples)
        pole = np.zeros(c1.n + 1, dtype=complex)
        pole[-1] = -1.0
        return float(np.max(np.linalg.norm(img - pole, axis=1)))
    if c1.samples.shape != c2.samples.shape or abs(c1.l - c2.l) > 1e-12 * max(1.0, c1.l):
        raise ValueError("curves must share horizon and sample grid")
    if compactified:
        return float(np.max(np.linalg.norm(sphere_image(c1.samples) - sphere_image(c2.samples), axis=1)))
    return float(np.max(homogeneous_norm(group_mul(group_inv(c1.samples), c2.samples))))


@dataclass(frozen=True)
class CurveCharge:
    """The charge [gamma] carried by a horizontal curve."""

    curve: HorizontalCurve

    def __call__(self, phi) -> float:
        return act(self.curve, phi)

    def variation(self, region=None) -> float:
        return variation(self.curve, region)

    def divergence(self, psi) -> float:
        return boundary_pairing(self.curve, psi)
