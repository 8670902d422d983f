"""Exact discrete optimal transport by the transportation simplex.

The solver starts from the north-west-corner plan and pivots on the most
negative reduced cost until none is below ``-PIVOT_TOL``. Each pivot walks the
unique cycle that the entering cell closes in the basis spanning tree.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-12
MAX_SUPPORT = 512


@dataclass(frozen=True, eq=False)
class TransportPlan:
    rows: np.ndarray
    cols: np.ndarray
    mass: np.ndarray
    cost: float

    @property
    def entries(self) -> list[tuple[int, int, float]]:
        return [(int(i), int(j), float(w)) for i, j, w in zip(self.rows, self.cols, self.mass)]

    def dense(self, n: int, m: int) -> np.ndarray:
        out = np.zeros((n, m))
        np.add.at(out, (self.rows, self.cols), self.mass)
        return out


def _northwest(a: np.ndarray, b: np.ndarray):
    n, m = len(a), len(b)
    ra, rb = a.copy(), b.copy()
    flow = np.zeros((n, m))
    basis = []
    i = j = 0
    while True:
        q = min(ra[i], rb[j])
        flow[i, j] = q
        basis.append((i, j))
        ra[i] -= q
        rb[j] -= q
        if i == n - 1 and j == m - 1:
            break
        if j == m - 1 or (i < n - 1 and ra[i] <= rb[j]):
            i += 1
        else:
            j += 1
    return flow, basis


def _tree(basis, n: int, m: int):
    adj = [[] for _ in range(n + m)]
    for i, j in basis:
        adj[i].append(n + j)
        adj[n + j].append(i)
    return adj


def _potentials(C: np.ndarray, adj, n: int, m: int):
    u, v = np.zeros(n), np.zeros(m)
    seen = np.zeros(n + m, bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        k = queue.popleft()
        for nb in adj[k]:
            if seen[nb]:
                continue
            seen[nb] = True
            if k < n:
                v[nb - n] = C[k, nb - n] - u[k]
            else:
                u[nb] = C[nb, k - n] - v[k - n]
            queue.append(nb)
    return u, v


def _tree_path(adj, start: int, goal: int) -> list[int]:
    parent = {start: -1}
    queue = deque([start])
    while queue:
        k = queue.popleft()
        if k == goal:
            break
        for nb in adj[k]:
            if nb not in parent:
                parent[nb] = k
                queue.append(nb)
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    return path[::-1]


def transport_simplex(a, b, C, max_pivots: int | None = None) -> TransportPlan:
    """Minimum-cost plan between weight vectors ``a`` and ``b`` under cost matrix ``C``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    C = np.asarray(C, dtype=float)
    n, m = len(a), len(b)
    if C.shape != (n, m):
        raise ValueError("cost matrix shape does not match the marginals")
    if abs(a.sum() - b.sum()) > 1e-9 * max(a.sum(), 1.0):
        raise ValueError("marginals carry different total mass")
    b = b * (a.sum() / b.sum())
    flow, basis = _northwest(a, b)
    scale = max(float(np.abs(C).max()), 1.0)
    cap = max_pivots or 50 * (n + m) ** 2
    for _ in range(cap):
        adj = _tree(basis, n, m)
        u, v = _potentials(C, adj, n, m)
        red = C - u[:, None] - v[None, :]
        k = int(np.argmin(red))
        ie, je = divmod(k, m)
        if red[ie, je] >= -PIVOT_TOL * scale:
            break
        # cycle: entering cell, then the tree path from column je back to row ie
        path = _tree_path(adj, n + je, ie)
        cells = []
        for p, q in zip(path[:-1], path[1:]):
            cells.append((q, p - n) if p >= n else (p, q - n))
        minus = cells[0::2]
        plus = cells[1::2]
        theta_idx = min(range(len(minus)), key=lambda r: (flow[minus[r]], r))
        theta = flow[minus[theta_idx]]
        for c in minus:
            flow[c] -= theta
        for c in plus:
            flow[c] += theta
        flow[ie, je] += theta
        flow[minus[theta_idx]] = 0.0
        basis.remove(minus[theta_idx])
        basis.append((ie, je))
    else:
        raise RuntimeError("transportation simplex did not converge")
    rows, cols = np.nonzero(flow > 0)
    mass = flow[rows, cols]
    return TransportPlan(rows, cols, mass, float(mass @ C[rows, cols]))


def w1_1d(xa, a, xb, b) -> float:
    """``int |F_a - F_b|`` for two weighted point sets on the line."""
    xa, xb = np.asarray(xa, dtype=float).ravel(), np.asarray(xb, dtype=float).ravel()
    pts = np.concatenate([xa, xb])
    w = np.concatenate([np.asarray(a, dtype=float), -np.asarray(b, dtype=float)])
    order = np.argsort(pts, kind="stable")
    diff = np.cumsum(w[order])[:-1]
    return float(np.abs(diff) @ np.diff(pts[order]))


def quantile_plan(xa, a, xb, b, C) -> TransportPlan:
    """Monotone (quantile) coupling: the north-west rule on sorted supports."""
    ia = np.argsort(np.asarray(xa, dtype=float).ravel(), kind="stable")
    ib = np.argsort(np.asarray(xb, dtype=float).ravel(), kind="stable")
    a, b = np.asarray(a, dtype=float)[ia], np.asarray(b, dtype=float)[ib]
    flow, _ = _northwest(a, b * (a.sum() / b.sum()))
    r, c = np.nonzero(flow > 0)
    rows, cols, mass = ia[r], ib[c], flow[r, c]
    return TransportPlan(rows, cols, mass, float(mass @ np.asarray(C)[rows, cols]))


def check_size(n: int, m: int) -> None:
    if n > MAX_SUPPORT or m > MAX_SUPPORT:
        raise ValueError(f"support sizes ({n}, {m}) exceed {MAX_SUPPORT}")
