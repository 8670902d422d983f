"""Feasible sets with exact linear minimization oracles.

Every set exposes the same small surface:

* ``lmo(G)`` -- argmin of ``<g, x>`` over the set, row-wise for a ``(m, d)`` batch
* ``diameter(norm)``
* ``contains(p, tol)`` -- L-infinity membership with slack
* ``enumerate()`` -- only for :class:`Grid`

Points are plain 1-d float arrays. Ties are always broken towards the lowest
index (coordinate for Box/Simplex, enumeration order for Grid).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence, Union

import numpy as np

DEFAULT_TOL = 1e-9


class NotEnumerableError(TypeError):
    """Raised when enumeration is requested on a continuous set."""


class Norm(str, Enum):
    L1 = "L1"
    L2 = "L2"
    LINF = "Linf"

    def __call__(self, v: np.ndarray, axis: int = -1) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self is Norm.L1:
            return np.abs(v).sum(axis=axis)
        if self is Norm.L2:
            return np.sqrt((v * v).sum(axis=axis))
        return np.abs(v).max(axis=axis)

    @property
    def dual(self) -> "Norm":
        return {Norm.L1: Norm.LINF, Norm.L2: Norm.L2, Norm.LINF: Norm.L1}[self]


@dataclass(frozen=True)
class NormTag:
    """A norm on R^d together with its compatibility constants.

    ``psi1 = sup ||x|| / ||x||_2`` and ``psi2 = sup ||x||_2 / ||x||``.
    """

    kind: Norm
    dim: int

    @property
    def psi1(self) -> float:
        return math.sqrt(self.dim) if self.kind is Norm.L1 else 1.0

    @property
    def psi2(self) -> float:
        return math.sqrt(self.dim) if self.kind is Norm.LINF else 1.0

    def __call__(self, v, axis: int = -1):
        return self.kind(v, axis=axis)


def _as_vector(g, dim: int) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape[-1] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {g.shape[-1]}")
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite linear objective")
    return g


def _row_norm2(G: np.ndarray) -> np.ndarray:
    # explicit row reduction so chunked and full batches agree bitwise
    return np.sqrt((G * G).sum(axis=-1))


@dataclass(frozen=True, eq=False)
class Ball2:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise ValueError("Ball2 radius must be positive")

    @classmethod
    def unit(cls, dim: int, radius: float = 1.0) -> "Ball2":
        return cls(np.zeros(dim), radius)

    @property
    def dim(self) -> int:
        return self.center.size

    def lmo(self, G) -> np.ndarray:
        G = _as_vector(G, self.dim)
        n = _row_norm2(G)[..., None]
        safe = np.where(n > 0, n, 1.0)
        # g = 0 -> center
        return self.center - self.radius * np.where(n > 0, G / safe, 0.0)

    def diameter(self, norm: Norm) -> float:
        if norm is Norm.L1:
            return 2.0 * self.radius * math.sqrt(self.dim)
        return 2.0 * self.radius

    def contains(self, p, tol: float = DEFAULT_TOL) -> bool:
        p = _as_vector(p, self.dim)
        # closest point of the box [p - tol, p + tol] to the center
        q = np.clip(self.center, p - tol, p + tol)
        return bool(np.linalg.norm(q - self.center) <= self.radius * (1 + 1e-15))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = rng.standard_normal((n, self.dim))
        z /= _row_norm2(z)[:, None]
        r = self.radius * rng.random(n) ** (1.0 / self.dim)
        return self.center + z * r[:, None]

    def to_record(self) -> dict:
        return {"type": "ball2", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("Box bounds have different dimensions")
        if np.any(lo > hi):
            raise ValueError("Box requires lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def lmo(self, G) -> np.ndarray:
        G = _as_vector(G, self.dim)
        return np.where(G < 0, self.hi, self.lo)

    def diameter(self, norm: Norm) -> float:
        return float(norm(self.hi - self.lo))

    def contains(self, p, tol: float = DEFAULT_TOL) -> bool:
        p = _as_vector(p, self.dim)
        return bool(np.all(p >= self.lo - tol) and np.all(p <= self.hi + tol))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * rng.random((n, self.dim))

    def to_record(self) -> dict:
        return {"type": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True)
class Simplex:
    """Probability simplex in R^dim."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("Simplex dimension must be positive")

    def lmo(self, G) -> np.ndarray:
        G = _as_vector(G, self.dim)
        idx = np.argmin(G, axis=-1)  # first minimal coordinate
        return np.eye(self.dim)[idx]

    def diameter(self, norm: Norm) -> float:
        if self.dim == 1:
            return 0.0
        return {Norm.L1: 2.0, Norm.L2: math.sqrt(2.0), Norm.LINF: 1.0}[norm]

    def contains(self, p, tol: float = DEFAULT_TOL) -> bool:
        p = _as_vector(p, self.dim)
        if np.any(p < -tol):
            return False
        lo = np.maximum(p - tol, 0.0).sum()
        hi = (p + tol).sum()
        return bool(lo <= 1.0 <= hi)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.dirichlet(np.ones(self.dim), size=n)

    def to_record(self) -> dict:
        return {"type": "simplex", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Grid:
    """Finite set: either a product of sorted per-axis ticks or an explicit point list.

    Points are enumerated lexicographically by axis index (the last axis moves
    fastest), or in list order for explicit grids.
    """

    axes: tuple | None = None
    points_list: np.ndarray | None = None
    _points: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if (self.axes is None) == (self.points_list is None):
            raise ValueError("Grid needs exactly one of axes / points_list")
        if self.axes is not None:
            axes = tuple(np.asarray(a, dtype=float).reshape(-1) for a in self.axes)
            for a in axes:
                if a.size == 0:
                    raise ValueError("Grid axis has no ticks")
                if np.any(np.diff(a) <= 0):
                    raise ValueError("Grid axis ticks must be sorted and distinct")
            object.__setattr__(self, "axes", axes)
        else:
            pts = np.atleast_2d(np.asarray(self.points_list, dtype=float))
            if pts.shape[0] == 0:
                raise ValueError("Grid needs at least one point")
            if len(np.unique(pts, axis=0)) != len(pts):
                raise ValueError("Grid points must be distinct")
            object.__setattr__(self, "points_list", pts)

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]]) -> "Grid":
        return cls(points_list=np.asarray(points, dtype=float))

    @property
    def dim(self) -> int:
        return len(self.axes) if self.axes is not None else self.points_list.shape[1]

    @property
    def shape(self) -> tuple[int, ...]:
        if self.axes is not None:
            return tuple(a.size for a in self.axes)
        return (self.points_list.shape[0],)

    def __len__(self) -> int:
        return int(np.prod(self.shape))

    def enumerate(self) -> Iterator[np.ndarray]:
        if self.axes is None:
            yield from (p.copy() for p in self.points_list)
            return
        for combo in itertools.product(*self.axes):
            yield np.array(combo)

    @property
    def points(self) -> np.ndarray:
        """All points as an ``(n, d)`` array in enumeration order (cached)."""
        if self._points is None:
            if self.axes is None:
                pts = self.points_list
            else:
                mesh = np.meshgrid(*self.axes, indexing="ij")
                pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
            pts.setflags(write=False)
            object.__setattr__(self, "_points", pts)
        return self._points

    def lmo_index(self, G) -> np.ndarray:
        G = _as_vector(G, self.dim)
        if self.axes is None:
            return np.argmin(G @ self.points.T, axis=-1)
        # separable objective: per-axis argmin, lowest tick index on ties
        per_axis = [np.argmin(G[..., [k]] * a, axis=-1) for k, a in enumerate(self.axes)]
        return np.ravel_multi_index(tuple(per_axis), self.shape)

    def lmo(self, G) -> np.ndarray:
        return self.points[self.lmo_index(G)]

    def diameter(self, norm: Norm) -> float:
        if self.axes is not None:
            return float(norm(np.array([a[-1] - a[0] for a in self.axes])))
        pts = self.points
        return float(max(norm(pts - p).max() for p in pts))

    def contains(self, p, tol: float = DEFAULT_TOL) -> bool:
        p = _as_vector(p, self.dim)
        if self.axes is not None:
            return all(np.min(np.abs(a - x)) <= tol for a, x in zip(self.axes, p))
        return bool(np.min(np.abs(self.points - p).max(axis=1)) <= tol)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.points[rng.integers(0, len(self), size=n)]

    def to_record(self) -> dict:
        if self.axes is not None:
            return {"type": "grid", "axes": [a.tolist() for a in self.axes]}
        return {"type": "grid", "points": self.points_list.tolist()}


FeasibleSet = Union[Ball2, Box, Simplex, Grid]


def linear_minimize(fset: FeasibleSet, g) -> np.ndarray:
    """Return a minimizer of ``<g, x>`` over ``fset`` (batched over leading axes)."""
    return fset.lmo(g)


def diameter(fset: FeasibleSet, norm: Norm | NormTag | str = Norm.L2) -> float:
    if isinstance(norm, NormTag):
        norm = norm.kind
    return fset.diameter(Norm(norm))


def contains(fset: FeasibleSet, p, tol: float = DEFAULT_TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return fset.contains(p, tol)


def enumerate_points(fset: FeasibleSet) -> list[np.ndarray]:
    if not isinstance(fset, Grid):
        raise NotEnumerableError(f"{type(fset).__name__} is not enumerable")
    return list(fset.enumerate())


def from_record(rec: dict) -> FeasibleSet:
    """Build a set from a config record such as ``{"type": "ball2", "center": [0, 0], "radius": 1}``."""
    kind = rec.get("type")
    if kind == "ball2":
        if "center" in rec:
            center = rec["center"]
        else:
            center = np.zeros(int(rec["dim"]))
        return Ball2(np.asarray(center, dtype=float), float(rec.get("radius", 1.0)))
    if kind == "box":
        return Box(np.asarray(rec["lo"], dtype=float), np.asarray(rec["hi"], dtype=float))
    if kind == "simplex":
        return Simplex(int(rec["dim"]))
    if kind == "grid":
        if "axes" in rec:
            return Grid(axes=tuple(rec["axes"]))
        if "points" in rec:
            return Grid.from_points(rec["points"])
        if "linspace" in rec:
            lo, hi, n = rec["linspace"]
            reps = int(rec.get("dim", 1))
            ticks = np.linspace(float(lo), float(hi), int(n))
            return Grid(axes=tuple(ticks for _ in range(reps)))
        raise ValueError("grid record needs 'axes', 'points' or 'linspace'")
    raise ValueError(f"unknown feasible set type {kind!r}")
