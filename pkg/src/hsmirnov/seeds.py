"""Quadrature of the seed measure rho = (|mu| * J) h.

Nodes sit on a product midpoint grid with horizontal step ``h`` and vertical
step ``hz``.  Only nodes inside the union of the balls B_eps . x_i carry
density, and those are enumerated directly, so the cost scales with the
support of the charge rather than its bounding box.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .calculus import MollifiedCharge


@dataclass(frozen=True)
class SeedQuadrature:
    points: np.ndarray  # (S, 2n+1)
    masses: np.ndarray  # (S,)
    h: float
    hz: float

    def __len__(self):
        return len(self.masses)

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    @property
    def cell_volume(self) -> float:
        d = self.points.shape[1]
        return self.h ** (d - 1) * self.hz

    def integrate(self, f) -> float:
        """Integral of a scalar function against rho."""
        if len(self) == 0:
            return 0.0
        return float(self.masses @ np.asarray(f(self.points), dtype=float))


def seed_quadrature(mc: MollifiedCharge, grid: float, z_grid: float | None = None,
                    jitter_seed: int | None = None, chunk: int = 500_000) -> SeedQuadrature:
    """Nodes and masses rho(node) * cell volume for the mollified charge ``mc``.

    ``z_grid`` defaults to ``grid * eps`` which keeps the node count per ball
    the same along every axis.  With ``jitter_seed`` the grid offset is drawn
    from a seeded generator instead of the cell midpoint.
    """
    if not grid > 0:
        raise ValueError("grid step must be positive")
    eps = mc.J.eps
    hz = grid * eps if z_grid is None else float(z_grid)
    if not hz > 0:
        raise ValueError("vertical grid step must be positive")
    d = 2 * mc.n + 1
    if jitter_seed is None:
        off = np.full(d, 0.5)
    else:
        off = np.random.default_rng(jitter_seed).random(d)
    if len(mc.mu) == 0:
        return SeedQuadrature(np.zeros((0, d)), np.zeros(0), float(grid), float(hz))
    nodes = _kernels.ball_grid_nodes(mc.mu.points, eps, grid, hz, off)
    rho = np.empty(len(nodes))
    for s in range(0, len(nodes), chunk):
        rho[s:s + chunk] = mc.evaluate(nodes[s:s + chunk])[1]
    keep = rho > 0.0
    vol = grid ** (d - 1) * hz
    return SeedQuadrature(np.ascontiguousarray(nodes[keep]), rho[keep] * vol, float(grid), float(hz))
