"""Optimistic FTPL for nonconvex losses on enumerable domains.

Losses and guesses are tabulated on the grid, so a perturbed best response is a
single pass over ``cumulative + guess - <sigma_bar, x>``. With linear
perturbations ``sigma(x) = <sigma_bar, x>`` the table is the only state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import perturbations as prt
from ._parallel import map_rows
from .domains import Grid, NotEnumerableError

@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Weighted support over grid indices, kept in canonical (sorted, merged) form."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.support, dtype=np.int64).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if idx.shape != w.shape:
            raise ValueError("support and weights differ in length")
        if idx.size == 0:
            raise ValueError("empty support")
        if np.any(w < 0) or np.any(idx < 0):
            raise ValueError("negative weight or index")
        uniq, inv = np.unique(idx, return_inverse=True)
        merged = np.bincount(inv, weights=w)
        total = merged.sum()
        if not total > 0:
            raise ValueError("weights sum to zero")
        object.__setattr__(self, "support", uniq)
        object.__setattr__(self, "weights", merged / total)

    @classmethod
    def from_samples(cls, indices) -> "EmpiricalDistribution":
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        return cls(idx, np.full(idx.size, 1.0 / max(idx.size, 1)))

    @classmethod
    def from_dense(cls, weights) -> "EmpiricalDistribution":
        w = np.asarray(weights, dtype=float)
        nz = np.flatnonzero(w > 0)
        return cls(nz, w[nz])

    @classmethod
    def point_mass(cls, index: int) -> "EmpiricalDistribution":
        return cls(np.array([index]), np.array([1.0]))

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.support] = self.weights
        return out

    def expect(self, values) -> float:
        """``E_{x ~ P}[values[x]]`` for a table aligned with the grid."""
        return float(self.weights @ np.asarray(values, dtype=float)[self.support])

    def __len__(self) -> int:
        return self.support.size


def mixture(dists) -> EmpiricalDistribution:
    dists = list(dists)
    idx = np.concatenate([p.support for p in dists])
    w = np.concatenate([p.weights for p in dists]) / len(dists)
    return EmpiricalDistribution(idx, w)


@dataclass
class CumulativeLossTable:
    values: np.ndarray
    t: int = 1

    @classmethod
    def zeros(cls, n: int) -> "CumulativeLossTable":
        return cls(np.zeros(n))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).copy()
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite table entry")

    def __len__(self) -> int:
        return self.values.size


def update_table(table: CumulativeLossTable, f_values) -> CumulativeLossTable:
    f = np.asarray(f_values, dtype=float)
    if f.shape != table.values.shape:
        raise ValueError("loss table is not aligned with the grid")
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite loss values")
    table.values = table.values + f
    table.t += 1
    return table


def _require_grid(grid) -> Grid:
    if not isinstance(grid, Grid):
        raise NotEnumerableError(f"{type(grid).__name__} is not enumerable")
    return grid


def pbr_objectives(base: np.ndarray, points: np.ndarray, sigma_bar: np.ndarray) -> np.ndarray:
    """``base[x] - <sigma_bar_j, x>`` for every row j and grid point x."""
    return base[None, :] - np.atleast_2d(sigma_bar) @ points.T


def pbr_indices(base: np.ndarray, grid: Grid, sigma_bar, workers: int = 1) -> np.ndarray:
    """Perturbed best-response indices, one per row of ``sigma_bar`` (lowest index on ties)."""
    pts = _require_grid(grid).points
    sig = np.atleast_2d(np.asarray(sigma_bar, dtype=float))
    return map_rows(lambda s: np.argmin(pbr_objectives(base, pts, s), axis=1), sig, workers)


def pbr_oracle(table: CumulativeLossTable, guess_values, sigma_bar, grid: Grid) -> np.ndarray:
    grid = _require_grid(grid)
    base = table.values if guess_values is None else table.values + np.asarray(guess_values, dtype=float)
    if base.shape != (len(grid),):
        raise ValueError("tables are not aligned with the grid enumeration")
    return grid.points[pbr_indices(base, grid, sigma_bar)[0]].copy()


def argmin_gaps(base: np.ndarray, grid: Grid, sigma_bar) -> np.ndarray:
    """Gap between the best and second-best perturbed objective for each draw."""
    obj = pbr_objectives(base, _require_grid(grid).points, sigma_bar)
    if obj.shape[1] < 2:
        return np.full(obj.shape[0], np.inf)
    two = np.partition(obj, 1, axis=1)[:, :2]
    return two[:, 1] - two[:, 0]


@dataclass
class NonconvexOFTPL:
    grid: Grid
    spec: prt.PerturbationSpec
    m: int = 1
    table: CumulativeLossTable | None = None
    oracle_calls: int = 0
    workers: int = 1
    last_values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        _require_grid(self.grid)
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.spec.dim != self.grid.dim:
            raise ValueError("perturbation and grid dimensions differ")
        if self.table is None:
            self.table = CumulativeLossTable.zeros(len(self.grid))

    @property
    def t(self) -> int:
        return self.table.t

    def indices(self, guess_values, sigma_bar) -> np.ndarray:
        base = self.table.values
        if guess_values is not None:
            base = base + np.asarray(guess_values, dtype=float)
        idx = pbr_indices(base, self.grid, sigma_bar, self.workers)
        self.oracle_calls += len(idx)
        return idx

    def step(self, guess_values, stream: prt.RngStream) -> EmpiricalDistribution:
        sigma_bar = prt.sample(self.spec, stream, size=self.m)
        return EmpiricalDistribution.from_samples(self.indices(guess_values, sigma_bar))

    def tilde(self, stream: prt.RngStream) -> EmpiricalDistribution:
        return self.step(None, stream)

    def update(self, f_values) -> "NonconvexOFTPL":
        update_table(self.table, f_values)
        self.last_values = np.asarray(f_values, dtype=float)
        return self


def oftpl_nc_step(table: CumulativeLossTable, guess_values, m: int, stream: prt.RngStream,
                  spec: prt.PerturbationSpec, grid: Grid) -> EmpiricalDistribution:
    learner = NonconvexOFTPL(grid, spec, m, table=table)
    return learner.step(guess_values, stream)


def sample_action(P: EmpiricalDistribution, stream: prt.RngStream) -> int:
    """Grid index drawn proportionally to the weights of ``P``."""
    if len(P) == 0:
        raise ValueError("empty support")
    u = stream.generator().random()
    cdf = np.cumsum(P.weights)
    k = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return int(P.support[min(k, len(P) - 1)])


def regret_bound_nonconvex(eta: float, D: float, d: int, G: float, T: int) -> float:
    """Zero-guess regret bound with exponential perturbations and stability ``125 d^2 D / eta``.

    ``D`` is the L1 diameter of the grid (the W1 diameter of distributions on it)
    and ``G`` bounds the Lipschitz seminorm of each loss.
    """
    return eta * prt.harmonic(d) * D + 125.0 * d * d * D * G * G * T / (2.0 * eta)


def tuned_eta_nonconvex(d: int, G: float, T: int) -> float:
    """eta minimising :func:`regret_bound_nonconvex` (independent of D)."""
    return d * G * math.sqrt(125.0 * T / (2.0 * prt.harmonic(d)))
