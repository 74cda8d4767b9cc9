"""Fields, discrete charges, horizontal derivatives and mollification.

Scalar fields map point arrays (..., 2n+1) to values (...); horizontal vector
fields map them to frame coefficients (..., 2n).  All callables are expected
to broadcast over leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gamma, pi, sqrt
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import _kernels
from .group import as_point, dim_of, exp_horizontal, frame, group_mul, homogeneous_norm


@dataclass(frozen=True)
class ScalarField:
    f: Callable
    grad: Callable | None = None  # analytic frame derivatives (X_1..Y_n)
    name: str = ""

    def __call__(self, p):
        return np.asarray(self.f(np.asarray(p, dtype=float)), dtype=float)


@dataclass(frozen=True)
class HVectorField:
    f: Callable
    n: int
    growth_bound: float | None = None  # c with |field(x)| <= c (1 + ||x||)
    name: str = ""

    def __call__(self, p):
        return np.asarray(self.f(np.asarray(p, dtype=float)), dtype=float)

    def sup_norm(self, points) -> float:
        v = self(points)
        return float(np.max(np.linalg.norm(v, axis=-1))) if v.size else 0.0

    def check_growth(self, radius: float = 4.0, per_axis: int = 7) -> bool:
        """Sample the growth bound on a grid of the norm ball of ``radius``."""
        if self.growth_bound is None:
            return True
        d = 2 * self.n + 1
        g = np.linspace(-radius, radius, per_axis)
        pts = np.stack(np.meshgrid(*([g] * (d - 1) + [np.linspace(-radius ** 2, radius ** 2, per_axis)]),
                                   indexing="ij"), axis=-1).reshape(-1, d)
        pts = pts[homogeneous_norm(pts) <= radius]
        lhs = np.linalg.norm(self(pts), axis=-1)
        return bool(np.all(lhs <= self.growth_bound * (1.0 + homogeneous_norm(pts)) + 1e-12))


def from_euclidean(f, egrad, name: str = "") -> ScalarField:
    """Scalar field whose frame derivatives come from a Euclidean gradient."""
    def grad(p):
        g = egrad(p)
        return np.einsum("...ij,...i->...j", frame(p), g)
    return ScalarField(f, grad, name)


class DiscreteCharge:
    """Finitely many atoms (x_i, v_i): the charge sum_i v_i delta_{x_i}."""

    def __init__(self, points, vectors, n: int | None = None):
        points = np.asarray(points, dtype=float)
        vectors = np.asarray(vectors, dtype=float)
        if points.ndim == 1 and points.size == 0:
            if n is None:
                raise ValueError("an empty charge needs n")
            points = points.reshape(0, 2 * n + 1)
            vectors = vectors.reshape(0, 2 * n)
        if points.ndim != 2 or vectors.ndim != 2 or len(points) != len(vectors):
            raise ValueError("points and vectors must be 2-d arrays of equal length")
        n_pts = dim_of(points)
        if n is not None and n != n_pts:
            raise ValueError(f"charge declared in H^{n} but points have length {points.shape[1]}")
        if len(points):
            as_point(points)
        if vectors.shape[1] != 2 * n_pts:
            raise ValueError(f"vectors must have length {2 * n_pts}, got {vectors.shape[1]}")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("vectors must be finite")
        keep = np.any(vectors != 0.0, axis=1)
        self.points = np.ascontiguousarray(points[keep])
        self.vectors = np.ascontiguousarray(vectors[keep])
        self.points.flags.writeable = False
        self.vectors.flags.writeable = False
        self.n = n_pts

    @classmethod
    def empty(cls, n: int) -> "DiscreteCharge":
        return cls(np.zeros((0, 2 * n + 1)), np.zeros((0, 2 * n)))

    @classmethod
    def from_atoms(cls, atoms, n: int | None = None) -> "DiscreteCharge":
        atoms = list(atoms)
        if not atoms:
            if n is None:
                raise ValueError("an empty atom list needs n")
            return cls.empty(n)
        return cls([a[0] for a in atoms], [a[1] for a in atoms], n)

    def __len__(self):
        return len(self.points)

    @property
    def weights(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    @property
    def directions(self) -> np.ndarray:
        return self.vectors / self.weights[:, None]

    @property
    def variation(self) -> float:
        return float(self.weights.sum())

    def pair(self, phi) -> float:
        """<mu, Phi> = sum_i <Phi(x_i), v_i>."""
        if len(self) == 0:
            return 0.0
        return float(np.sum(phi(self.points) * self.vectors))

    def atoms(self):
        return list(zip(self.points, self.vectors))

    def bounds(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def __repr__(self):
        return f"DiscreteCharge(n={self.n}, atoms={len(self)}, var={self.variation:.6g})"


# --- derivatives -------------------------------------------------------------

def frame_derivative(f, direction: int, p, h: float = 1e-5):
    """Central difference of f along t -> p . exp(t e_direction), direction in 0..2n-1."""
    if not h > 0:
        raise ValueError("step must be positive")
    p = as_point(p)
    n = dim_of(p)
    if not 0 <= direction < 2 * n:
        raise ValueError(f"frame direction must be in 0..{2 * n - 1}")
    e = np.zeros(2 * n)
    e[direction] = h
    step = exp_horizontal(e)
    return (f(group_mul(p, step)) - f(group_mul(p, -step))) / (2 * h)


def horizontal_gradient(f, p, h: float = 1e-5) -> np.ndarray:
    p = as_point(p)
    if isinstance(f, ScalarField) and f.grad is not None:
        return np.asarray(f.grad(p), dtype=float)
    n = dim_of(p)
    return np.stack([frame_derivative(f, j, p, h) for j in range(2 * n)], axis=-1)


def weak_divergence(mu: DiscreteCharge, f, h: float = 1e-5) -> float:
    """<div_H mu, f> = - sum_i <grad_H f(x_i), v_i>."""
    if len(mu) == 0:
        return 0.0
    return -float(np.sum(horizontal_gradient(f, mu.points, h) * mu.vectors))


def smooth_divergence(V, p, h: float = 1e-5):
    """Pointwise div_H V = sum_i X_i V_i + sum_i Y_i V_{n+i}."""
    p = as_point(p)
    n = dim_of(p)
    return sum(frame_derivative(lambda q, j=j: V(q)[..., j], j, p, h) for j in range(2 * n))


def contact_form(p, tangent):
    """theta_p(tangent) with theta = dz - 1/2 sum_j (x_j dy_j - y_j dx_j)."""
    p = np.asarray(p, dtype=float)
    t = np.asarray(tangent, dtype=float)
    n = dim_of(p)
    return t[..., -1] - 0.5 * np.sum(p[..., :n] * t[..., n:2 * n] - p[..., n:2 * n] * t[..., :n], axis=-1)


# --- mollifier ----------------------------------------------------------------

def bump_profile(s):
    """exp(-1 / (1 - s^2)) for s < 1, zero otherwise."""
    s = np.asarray(s, dtype=float)
    inside = s < 1.0
    out = np.zeros_like(s)
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def sphere_constant(n: int) -> float:
    """A_n with  int f(||q||) dq = A_n int_0^inf f(r) r^(Q-1) dr  on H^n."""
    return 2 * pi ** n / gamma(n) * sqrt(pi) * gamma(n / 2) / gamma((n + 1) / 2)


@lru_cache(maxsize=None)
def mollifier_constant(n: int) -> float:
    """Normalisation so that the unit mollifier has Haar integral one.

    Uses polar coordinates for the homogeneous norm: with |h|^2 = r^2 cos a and
    z = r^2 sin a the Haar measure becomes r^(2n+1) cos^(n-1) a dr da dS.
    """
    Q = 2 * n + 2
    radial, _ = quad(lambda r: np.exp(-1.0 / (1.0 - r ** 4)) * r ** (Q - 1) if r < 1 else 0.0,
                     0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)
    return 1.0 / (sphere_constant(n) * radial)


@dataclass(frozen=True)
class Mollifier:
    """J_eps(q) = C eps^-Q bump((||q|| / eps)^2), supported in the eps norm ball."""

    n: int
    eps: float = 1.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("mollifier scale must be positive")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def Q(self) -> int:
        return 2 * self.n + 2

    @property
    def constant(self) -> float:
        return mollifier_constant(self.n)

    @property
    def prefactor(self) -> float:
        return self.constant / self.eps ** self.Q

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        return self.prefactor * bump_profile((homogeneous_norm(q) / self.eps) ** 2)


def mollifier_rescale(J: Mollifier, eps: float) -> Mollifier:
    return Mollifier(J.n, eps)


@lru_cache(maxsize=None)
def _reference_rule(n: int, m: int):
    """Tensor midpoint nodes of the unit ball with normalised mollifier weights."""
    g = (np.arange(m) + 0.5) / m * 2.0 - 1.0
    axes = [g] * (2 * n + 1)
    q = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2 * n + 1)
    w = bump_profile(homogeneous_norm(q) ** 2)
    keep = w > 0
    q, w = q[keep], w[keep]
    return q, w / w.sum()


def default_rule_size(n: int) -> int:
    return {1: 24, 2: 9}.get(n, 5)


class MollifiedCharge:
    """The smooth charge J_eps * mu, its density |mu| * J_eps and direction field.

    The kernel is applied on the right: (J * mu)(p) = sum_i J_eps(p x_i^-1) v_i.
    With this side the frame derivatives of the sum are derivatives of a test
    function paired with mu, so the mollified charge is solenoidal whenever mu is.
    """

    def __init__(self, mu: DiscreteCharge, J: Mollifier):
        if J.n != mu.n:
            raise ValueError("mollifier and charge live in different groups")
        self.mu = mu
        self.J = J
        self.index = _kernels.CellIndex(mu.points, J.eps)
        self._absv = np.ascontiguousarray(mu.weights)
        self.threshold = 1e-12 * mu.variation

    @property
    def n(self) -> int:
        return self.mu.n

    def evaluate(self, p):
        """(vector, density) at point array ``p``."""
        p = np.asarray(p, dtype=float)
        flat = np.ascontiguousarray(p.reshape(-1, p.shape[-1]))
        F = np.zeros((len(flat), 2 * self.n))
        rho = np.zeros(len(flat))
        if len(self.mu) and len(flat):
            _kernels.mollified_sums(flat, self.mu.points, self.mu.vectors, self._absv, self.J.eps,
                                    self.J.prefactor, *self.index.args(), F, rho)
        return F.reshape(p.shape[:-1] + (2 * self.n,)), rho.reshape(p.shape[:-1])

    def direction(self, p):
        """phi = (J * mu) / (|mu| * J), set to zero where the density is negligible."""
        F, rho = self.evaluate(p)
        ok = rho >= self.threshold
        out = np.zeros_like(F)
        out[ok] = F[ok] / rho[ok][:, None]
        return out

    def field(self) -> HVectorField:
        return HVectorField(self.direction, self.n, growth_bound=1.0, name="mollified direction")

    def pair(self, phi, rule_size: int | None = None, chunk: int = 200_000) -> float:
        """<J_eps * mu, Phi> = sum_i int J_eps(q) <Phi(q x_i), v_i> dq by a per-atom rule."""
        if len(self.mu) == 0:
            return 0.0
        q, w = _reference_rule(self.n, rule_size or default_rule_size(self.n))
        eps = self.J.eps
        qe = q * eps
        qe[:, -1] *= eps
        total = 0.0
        per = max(1, chunk // len(q))
        for s in range(0, len(self.mu), per):
            x = self.mu.points[s:s + per]
            v = self.mu.vectors[s:s + per]
            pts = group_mul(qe[None, :, :], x[:, None, :])
            vals = phi(pts)
            total += float(np.einsum("aqj,q,aj->", vals, w, v))
        return total

    def near_support(self, p, tol: float) -> np.ndarray:
        """Boolean mask of points with min_i ||p x_i^-1|| <= tol."""
        p = np.ascontiguousarray(np.asarray(p, dtype=float).reshape(-1, 2 * self.n + 1))
        out = np.zeros(len(p), dtype=bool)
        if len(self.mu) and len(p):
            _kernels.near_mask(p, self.mu.points, tol, *self.index.args(), out)
        return out

    def support_distance(self, p, reach: float) -> np.ndarray:
        """min_i ||p x_i^-1||, reported as inf beyond ``reach``."""
        p = np.ascontiguousarray(np.asarray(p, dtype=float).reshape(-1, 2 * self.n + 1))
        out = np.full(len(p), np.inf)
        if len(self.mu) and len(p):
            cells = int(np.ceil(reach / self.index.cell))
            _kernels.right_distance(p, self.mu.points, cells, *self.index.args(), out)
        return out


def mollify_charge(mu: DiscreteCharge, J: Mollifier, p):
    """(sum_i J_eps(p x_i^-1) v_i, sum_i J_eps(p x_i^-1) |v_i|)."""
    return MollifiedCharge(mu, J).evaluate(p)
