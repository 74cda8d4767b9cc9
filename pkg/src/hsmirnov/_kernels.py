"""Compiled inner loops: mollified sums, seed enumeration, support distance.

Atoms are bucketed on a dense 2-d grid over two horizontal axes (the two with
the widest spread).  A point only interacts with atoms whose horizontal part
lies within ``eps``, so a 3x3 block of cells of side >= eps is enough.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

MAX_CELLS = 4_000_000


class CellIndex:
    """Bucket atoms on two horizontal axes for fixed-radius neighbour queries."""

    def __init__(self, points: np.ndarray, cell: float):
        points = np.ascontiguousarray(points, dtype=float)
        n = (points.shape[1] - 1) // 2
        if len(points):
            spread = points[:, :2 * n].max(axis=0) - points[:, :2 * n].min(axis=0)
        else:
            spread = np.zeros(2 * n)
        order = np.argsort(-spread, kind="stable")
        self.ax0 = int(order[0])
        self.ax1 = int(order[1])
        if len(points):
            lo0, lo1 = points[:, self.ax0].min(), points[:, self.ax1].min()
            ext0, ext1 = spread[self.ax0], spread[self.ax1]
        else:
            lo0 = lo1 = ext0 = ext1 = 0.0
        while (ext0 / cell + 3) * (ext1 / cell + 3) > MAX_CELLS:
            cell *= 2.0
        self.cell = float(cell)
        self.o0 = lo0 - cell
        self.o1 = lo1 - cell
        self.n0 = int(ext0 / cell) + 3
        self.n1 = int(ext1 / cell) + 3
        if len(points):
            i0 = ((points[:, self.ax0] - self.o0) / cell).astype(np.int64)
            i1 = ((points[:, self.ax1] - self.o1) / cell).astype(np.int64)
            key = i0 * self.n1 + i1
        else:
            key = np.zeros(0, dtype=np.int64)
        self.order = np.argsort(key, kind="stable").astype(np.int64)
        self.start = np.searchsorted(key[self.order], np.arange(self.n0 * self.n1 + 1)).astype(np.int64)

    def args(self):
        return (self.ax0, self.ax1, self.cell, self.o0, self.o1, self.n0, self.n1,
                self.start, self.order)


@nb.njit(cache=True, parallel=True)
def mollified_sums(P, X, V, absV, eps, pref, ax0, ax1, cell, o0, o1, n0, n1, start, order,
                   F, rho):
    """F[k] = sum_i J(P_k x_i^-1) V_i and rho[k] = sum_i J(P_k x_i^-1) |V_i|."""
    d = P.shape[1]
    n = (d - 1) // 2
    e2 = eps * eps
    e4 = e2 * e2
    for k in nb.prange(P.shape[0]):
        for j in range(2 * n):
            F[k, j] = 0.0
        acc = 0.0
        c0 = int(math.floor((P[k, ax0] - o0) / cell))
        c1 = int(math.floor((P[k, ax1] - o1) / cell))
        for i0 in range(max(c0 - 1, 0), min(c0 + 2, n0)):
            for i1 in range(max(c1 - 1, 0), min(c1 + 2, n1)):
                c = i0 * n1 + i1
                for m in range(start[c], start[c + 1]):
                    i = order[m]
                    h2 = 0.0
                    om = 0.0
                    for j in range(n):
                        dx = P[k, j] - X[i, j]
                        dy = P[k, n + j] - X[i, n + j]
                        h2 += dx * dx + dy * dy
                        om += P[k, j] * X[i, n + j] - P[k, n + j] * X[i, j]
                    if h2 >= e2:
                        continue
                    dz = P[k, d - 1] - X[i, d - 1] - 0.5 * om
                    r4 = h2 * h2 + dz * dz
                    if r4 >= e4:
                        continue
                    s2 = r4 / e4
                    w = pref * math.exp(-1.0 / (1.0 - s2))
                    for j in range(2 * n):
                        F[k, j] += w * V[i, j]
                    acc += w * absV[i]
        rho[k] = acc


@nb.njit(cache=True, parallel=True)
def right_distance(P, X, reach, ax0, ax1, cell, o0, o1, n0, n1, start, order, out):
    """out[k] = min_i ||P_k x_i^-1|| over atoms within ``reach`` cells, else inf."""
    d = P.shape[1]
    n = (d - 1) // 2
    for k in nb.prange(P.shape[0]):
        best = np.inf
        c0 = int(math.floor((P[k, ax0] - o0) / cell))
        c1 = int(math.floor((P[k, ax1] - o1) / cell))
        for i0 in range(max(c0 - reach, 0), min(c0 + reach + 1, n0)):
            for i1 in range(max(c1 - reach, 0), min(c1 + reach + 1, n1)):
                c = i0 * n1 + i1
                for m in range(start[c], start[c + 1]):
                    i = order[m]
                    h2 = 0.0
                    om = 0.0
                    for j in range(n):
                        dx = P[k, j] - X[i, j]
                        dy = P[k, n + j] - X[i, n + j]
                        h2 += dx * dx + dy * dy
                        om += P[k, j] * X[i, n + j] - P[k, n + j] * X[i, j]
                    dz = P[k, d - 1] - X[i, d - 1] - 0.5 * om
                    r = (h2 * h2 + dz * dz) ** 0.25
                    if r < best:
                        best = r
        out[k] = best


@nb.njit(cache=True, parallel=True)
def near_mask(P, X, tol, ax0, ax1, cell, o0, o1, n0, n1, start, order, out):
    """out[k] = True iff some atom satisfies ||P_k x_i^-1|| <= tol."""
    d = P.shape[1]
    n = (d - 1) // 2
    reach = int(math.ceil(tol / cell))
    t2 = tol * tol
    t4 = t2 * t2
    for k in nb.prange(P.shape[0]):
        found = False
        c0 = int(math.floor((P[k, ax0] - o0) / cell))
        c1 = int(math.floor((P[k, ax1] - o1) / cell))
        for i0 in range(max(c0 - reach, 0), min(c0 + reach + 1, n0)):
            if found:
                break
            for i1 in range(max(c1 - reach, 0), min(c1 + reach + 1, n1)):
                if found:
                    break
                c = i0 * n1 + i1
                for m in range(start[c], start[c + 1]):
                    i = order[m]
                    h2 = 0.0
                    om = 0.0
                    for j in range(n):
                        dx = P[k, j] - X[i, j]
                        dy = P[k, n + j] - X[i, n + j]
                        h2 += dx * dx + dy * dy
                        om += P[k, j] * X[i, n + j] - P[k, n + j] * X[i, j]
                    if h2 > t2:
                        continue
                    dz = P[k, d - 1] - X[i, d - 1] - 0.5 * om
                    if h2 * h2 + dz * dz <= t4:
                        found = True
                        break
        out[k] = found


@nb.njit(cache=True)
def _ball_nodes(X, eps, h, hz, off, base, bits, count_only, keys):
    """Enumerate grid nodes inside the right-translated balls B_eps . x_i.

    Node coordinates are (idx_j + off_j) * step_j.  Keys pack the indices,
    shifted by ``base``, into ``bits`` bits each.  Returns the number of keys.
    """
    m, d = X.shape
    n = (d - 1) // 2
    e2 = eps * eps
    e4 = e2 * e2
    lo = np.empty(2 * n, dtype=np.int64)
    hi = np.empty(2 * n, dtype=np.int64)
    idx = np.empty(2 * n, dtype=np.int64)
    ph = np.empty(2 * n)
    total = 0
    for i in range(m):
        for j in range(2 * n):
            lo[j] = int(math.ceil((X[i, j] - eps) / h - off[j]))
            hi[j] = int(math.floor((X[i, j] + eps) / h - off[j]))
            idx[j] = lo[j]
        if np.any(hi < lo):
            continue
        while True:
            h2 = 0.0
            om = 0.0
            for j in range(2 * n):
                ph[j] = (idx[j] + off[j]) * h
            for j in range(n):
                dx = ph[j] - X[i, j]
                dy = ph[n + j] - X[i, n + j]
                h2 += dx * dx + dy * dy
                om += ph[j] * X[i, n + j] - ph[n + j] * X[i, j]
            if h2 < e2:
                half = math.sqrt(e4 - h2 * h2)
                zc = X[i, d - 1] + 0.5 * om
                k0 = int(math.ceil((zc - half) / hz - off[d - 1]))
                k1 = int(math.floor((zc + half) / hz - off[d - 1]))
                for kz in range(k0, k1 + 1):
                    zv = (kz + off[d - 1]) * hz - zc
                    if h2 * h2 + zv * zv >= e4:
                        continue
                    if not count_only:
                        key = 0
                        for j in range(2 * n):
                            key = (key << bits) | (idx[j] + base[j])
                        key = (key << bits) | (kz + base[d - 1])
                        keys[total] = key
                    total += 1
            # advance the multi-index over the horizontal box
            j = 2 * n - 1
            while j >= 0:
                idx[j] += 1
                if idx[j] <= hi[j]:
                    break
                idx[j] = lo[j]
                j -= 1
            if j < 0:
                break
    return total


def ball_grid_nodes(X: np.ndarray, eps: float, h: float, hz: float, off: np.ndarray) -> np.ndarray:
    """Unique grid nodes inside the union of the balls B_eps . x_i, as coordinates."""
    X = np.ascontiguousarray(X, dtype=float)
    d = X.shape[1]
    if len(X) == 0:
        return np.zeros((0, d))
    steps = np.full(d, h)
    steps[-1] = hz
    # index range of every coordinate, padded generously for the z shear
    hn = np.linalg.norm(X[:, :-1], axis=1)
    lo = np.floor((X.min(axis=0) - eps) / steps) - 2
    hi = np.ceil((X.max(axis=0) + eps) / steps) + 2
    zpad = np.ceil((eps * eps + 0.5 * eps * (hn.max() + eps)) / hz) + 2
    lo[-1] -= zpad
    hi[-1] += zpad
    bits = 63 // d
    if np.any(hi - lo + 1 >= 2 ** bits):
        raise ValueError("seed grid too fine for the packed index range; coarsen the grid")
    base = (-lo).astype(np.int64)
    off = np.asarray(off, dtype=float)
    dummy = np.zeros(1, dtype=np.int64)
    count = _ball_nodes(X, eps, h, hz, off, base, bits, True, dummy)
    keys = np.empty(count, dtype=np.int64)
    _ball_nodes(X, eps, h, hz, off, base, bits, False, keys)
    keys = np.unique(keys)
    mask = (1 << bits) - 1
    idx = np.empty((len(keys), d), dtype=np.int64)
    for j in range(d - 1, -1, -1):
        idx[:, j] = (keys & mask) - base[j]
        keys = keys >> bits
    return (idx + off) * steps
