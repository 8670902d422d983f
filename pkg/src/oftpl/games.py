"""Self-play solvers for two-player zero-sum games built from OFTPL learners.

The x player minimizes ``f(x, y)`` and the y player maximizes it, so the y
learner is fed ``-grad_y f``. With ``optimistic=True`` each round first
computes zero-guess ("tilde") predictions for both players on fresh
perturbations and uses the opponent's response at those predictions as the
guess. With ``optimistic=False`` the players run plain FTPL.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import perturbations as prt
from .convex import ConvexOFTPL
from .domains import Ball2, Box, FeasibleSet, Grid, Norm, Simplex, diameter
from .nonconvex import EmpiricalDistribution, NonconvexOFTPL

X_PLAYER, Y_PLAYER = 0, 1


class BoundUndefinedError(ValueError):
    pass


class BestResponseUnavailable(TypeError):
    pass


def _max_norm2(fset: FeasibleSet) -> float:
    if isinstance(fset, Ball2):
        return float(np.linalg.norm(fset.center)) + fset.radius
    if isinstance(fset, Box):
        return float(np.linalg.norm(np.maximum(np.abs(fset.lo), np.abs(fset.hi))))
    if isinstance(fset, Simplex):
        return 1.0
    return float(np.sqrt((fset.points ** 2).sum(axis=1)).max())


@dataclass(frozen=True)
class SaddleProblem:
    value: Callable[[np.ndarray, np.ndarray], float]
    grad_x: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_y: Callable[[np.ndarray, np.ndarray], np.ndarray]
    set_x: FeasibleSet
    set_y: FeasibleSet
    G: float
    L: float
    alpha: float = 1.0


@dataclass(frozen=True, eq=False)
class BilinearGame:
    """``f(x, y) = x^T A y + b^T x + c^T y`` over two sets with linear oracles."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    set_x: FeasibleSet
    set_y: FeasibleSet

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.zeros(A.shape[0]) if self.b is None else np.asarray(self.b, dtype=float)
        c = np.zeros(A.shape[1]) if self.c is None else np.asarray(self.c, dtype=float)
        if A.shape != (self.set_x.dim, self.set_y.dim) or b.shape != (A.shape[0],) or c.shape != (A.shape[1],):
            raise ValueError("game matrix and vectors do not match the set dimensions")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("non-finite game data")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @classmethod
    def random(cls, d: int, seed: int, op_norm: float = 1.0, radius: float = 1.0) -> "BilinearGame":
        """Gaussian ``A`` rescaled to operator norm ``op_norm`` over centred balls, b = c = 0."""
        A = np.random.default_rng(seed).standard_normal((d, d))
        A *= op_norm / np.linalg.norm(A, 2)
        ball = Ball2.unit(d, radius)
        return cls(A, np.zeros(d), np.zeros(d), ball, ball)

    @property
    def L(self) -> float:
        return float(np.linalg.norm(self.A, 2))

    @property
    def alpha(self) -> float:
        return 1.0

    @property
    def G(self) -> float:
        gx = self.L * _max_norm2(self.set_y) + np.linalg.norm(self.b)
        gy = self.L * _max_norm2(self.set_x) + np.linalg.norm(self.c)
        return float(max(gx, gy))

    def value(self, x, y) -> float:
        return float(x @ self.A @ y + self.b @ x + self.c @ y)

    def grad_x(self, x, y) -> np.ndarray:
        return self.A @ y + self.b

    def grad_y(self, x, y) -> np.ndarray:
        return self.A.T @ x + self.c

    def swapped(self) -> "BilinearGame":
        """The same game with roles exchanged: ``f'(y, x) = -f(x, y)``."""
        return BilinearGame(-self.A.T, -self.c, -self.b, self.set_y, self.set_x)

    def gaps(self, xbar: np.ndarray, ybar: np.ndarray) -> np.ndarray:
        """Exact duality gaps for rows of ``xbar`` and ``ybar``."""
        xbar, ybar = np.atleast_2d(xbar), np.atleast_2d(ybar)
        gy = xbar @ self.A + self.c
        gx = ybar @ self.A.T + self.b
        sup_y = xbar @ self.b + (gy * self.set_y.lmo(-gy)).sum(axis=1)
        inf_x = ybar @ self.c + (gx * self.set_x.lmo(gx)).sum(axis=1)
        return sup_y - inf_x


@dataclass(frozen=True, eq=False)
class GridGame:
    """Payoff table over ``grid_x`` x ``grid_y`` (rows index x, columns index y)."""

    payoff: np.ndarray
    grid_x: Grid
    grid_y: Grid
    G: float = math.nan
    L: float = math.nan
    alpha: float = 1.0

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.payoff, dtype=float))
        if M.shape != (len(self.grid_x), len(self.grid_y)):
            raise ValueError(f"payoff shape {M.shape} does not match grids "
                             f"({len(self.grid_x)}, {len(self.grid_y)})")
        if not np.all(np.isfinite(M)):
            raise ValueError("non-finite payoff entry")
        object.__setattr__(self, "payoff", M)

    @classmethod
    def from_function(cls, f, grid_x: Grid, grid_y: Grid, G: float, L: float) -> "GridGame":
        px, py = grid_x.points, grid_y.points
        M = np.array([[f(x, y) for y in py] for x in px])
        return cls(M, grid_x, grid_y, G, L)

    @classmethod
    def from_csv(cls, path, grid_x: Grid, grid_y: Grid, G: float = math.nan, L: float = math.nan) -> "GridGame":
        M = np.loadtxt(path, delimiter=",", ndmin=2)
        return cls(M, grid_x, grid_y, G, L)

    @property
    def set_x(self) -> Grid:
        return self.grid_x

    @property
    def set_y(self) -> Grid:
        return self.grid_y

    def value(self, P, Q) -> float:
        """``f(P, Q)`` as an exact weighted sum over the supports."""
        p, q = _dense(P, len(self.grid_x)), _dense(Q, len(self.grid_y))
        return float(p @ self.payoff @ q)

    def gaps(self, Pbar: np.ndarray, Qbar: np.ndarray) -> np.ndarray:
        """Gaps for rows of dense mixtures ``Pbar`` and ``Qbar``."""
        Pbar, Qbar = np.atleast_2d(Pbar), np.atleast_2d(Qbar)
        return (Pbar @ self.payoff).max(axis=1) - (Qbar @ self.payoff.T).min(axis=1)

    def swapped(self) -> "GridGame":
        return GridGame(-self.payoff.T, self.grid_y, self.grid_x, self.G, self.L, self.alpha)


def _dense(P, n: int) -> np.ndarray:
    if isinstance(P, EmpiricalDistribution):
        return P.dense(n)
    p = np.asarray(P, dtype=float)
    if p.shape != (n,):
        raise ValueError("mixture length does not match the grid")
    return p


def matching_pennies() -> GridGame:
    """``f(x, y) = (2x - 1)(2y - 1)`` on {0, 1}^2; unique mixed equilibrium at (1/2, 1/2)."""
    g = Grid(axes=[[0.0, 1.0]])
    return GridGame(np.array([[1.0, -1.0], [-1.0, 1.0]]), g, g, G=2.0, L=4.0)


def sin_products(n: int = 64, terms: int = 3, seed: int = 0) -> GridGame:
    """Smooth 1-d game ``sum_k a_k sin(w_k x + p_k) sin(v_k y + q_k)`` tabulated on ``n`` ticks of [0, 1].

    G and L are the analytic Lipschitz and smoothness constants of the generator.
    """
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1, 1, terms) / terms
    w, v = rng.uniform(1, np.pi, terms), rng.uniform(1, np.pi, terms)
    p, q = rng.uniform(0, 2 * np.pi, terms), rng.uniform(0, 2 * np.pi, terms)
    ticks = np.linspace(0.0, 1.0, n)
    M = (a * np.sin(np.outer(ticks, w) + p)) @ np.sin(np.outer(ticks, v) + q).T
    aa = np.abs(a)
    G = float(max(aa @ w, aa @ v))
    L = float(max(aa @ (w * w), aa @ (w * v), aa @ (v * v)))
    g = Grid(axes=[ticks])
    return GridGame(M, g, g, G=G, L=L)


def random_trig(grid_x: Grid, grid_y: Grid, terms: int = 4, seed: int = 0, lipschitz: float = 1.0) -> GridGame:
    """``sum_k a_k cos(<u_k, x> + <v_k, y> + phi_k)`` scaled so its gradient has sup-norm at most ``lipschitz``."""
    rng = np.random.default_rng(seed)
    u = rng.uniform(-np.pi, np.pi, (terms, grid_x.dim))
    v = rng.uniform(-np.pi, np.pi, (terms, grid_y.dim))
    phi = rng.uniform(0, 2 * np.pi, terms)
    a = rng.uniform(-1, 1, terms)
    freq = np.maximum(np.abs(u).max(axis=1), np.abs(v).max(axis=1))
    a *= lipschitz / float(np.abs(a) @ freq)
    phase = (grid_x.points @ u.T)[:, None, :] + (grid_y.points @ v.T)[None, :, :] + phi
    M = np.cos(phase) @ a
    return GridGame(M, grid_x, grid_y, G=lipschitz, L=float(np.abs(a) @ freq ** 2))


def duality_gap(problem, a, b) -> float:
    """``sup_y f(a, y) - inf_x f(x, b)``, clamped at zero when the raw value is within 1e-9 of it."""
    if isinstance(problem, GridGame):
        raw = problem.gaps(_dense(a, len(problem.grid_x)), _dense(b, len(problem.grid_y)))[0]
    elif isinstance(problem, BilinearGame):
        raw = problem.gaps(np.asarray(a, dtype=float), np.asarray(b, dtype=float))[0]
    else:
        raise BestResponseUnavailable(f"no exact best response for {type(problem).__name__}")
    if raw < -1e-9:
        raise ArithmeticError(f"negative duality gap {raw}")
    return max(float(raw), 0.0)


@dataclass
class CCHistory:
    x: np.ndarray
    y: np.ndarray
    x_tilde: np.ndarray
    y_tilde: np.ndarray
    oracle_calls: np.ndarray
    include_first: bool = True
    elapsed: np.ndarray | None = None

    @property
    def T(self) -> int:
        return len(self.x)

    def running_averages(self) -> tuple[np.ndarray, np.ndarray]:
        """Rows t = averaged iterates after t + 1 rounds."""
        return _running_mean(self.x, self.include_first), _running_mean(self.y, self.include_first)

    def average(self) -> tuple[np.ndarray, np.ndarray]:
        xa, ya = self.running_averages()
        return xa[-1], ya[-1]


@dataclass
class NCHistory:
    P: list
    Q: list
    P_tilde: list
    Q_tilde: list
    oracle_calls: np.ndarray
    nx: int
    ny: int
    include_first: bool = True
    elapsed: np.ndarray | None = None

    @property
    def T(self) -> int:
        return len(self.P)

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([p.dense(self.nx) for p in self.P]),
                np.array([q.dense(self.ny) for q in self.Q]))

    def running_averages(self) -> tuple[np.ndarray, np.ndarray]:
        Pd, Qd = self.dense()
        return _running_mean(Pd, self.include_first), _running_mean(Qd, self.include_first)

    def average(self) -> tuple[np.ndarray, np.ndarray]:
        Pa, Qa = self.running_averages()
        return Pa[-1], Qa[-1]


def _running_mean(rows: np.ndarray, include_first: bool) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    if include_first or len(rows) == 1:
        return np.cumsum(rows, axis=0) / np.arange(1, len(rows) + 1)[:, None]
    tail = np.cumsum(rows[1:], axis=0) / np.arange(1, len(rows))[:, None]
    return np.vstack([rows[:1], tail])


def solve_cc(problem, T: int, m: int, eta: float, seed: int,
             family: prt.Family | str = prt.Family.UNIFORM_BALL2, optimistic: bool = True,
             workers: int = 1, include_first: bool = True,
             lanes: tuple[int, int] = (X_PLAYER, Y_PLAYER), timed: bool = False) -> CCHistory:
    """Convex-concave self-play; round 1 plays pure-perturbation averages."""
    if T < 1 or m < 1 or not eta > 0:
        raise ValueError("need T >= 1, m >= 1, eta > 0")
    fam = prt.Family(family)
    lx = ConvexOFTPL(problem.set_x, prt.PerturbationSpec(fam, eta, problem.set_x.dim), m, workers=workers)
    ly = ConvexOFTPL(problem.set_y, prt.PerturbationSpec(fam, eta, problem.set_y.dim), m, workers=workers)
    sx, sy = prt.RngStream(seed, (lanes[0],)), prt.RngStream(seed, (lanes[1],))
    xs, ys, xts, yts, calls, clock = [], [], [], [], [], []
    start = time.perf_counter()
    nan_x, nan_y = np.full(lx.dim, np.nan), np.full(ly.dim, np.nan)
    for t in range(1, T + 1):
        gx = gy = None
        xt, yt = nan_x, nan_y
        if optimistic and t > 1:
            xt = lx.tilde(sx.child(t, "tilde"))
            yt = ly.tilde(sy.child(t, "tilde"))
            gx, gy = problem.grad_x(xt, yt), -problem.grad_y(xt, yt)
        x, _ = lx.step(gx, sx.child(t, "play"))
        y, _ = ly.step(gy, sy.child(t, "play"))
        lx.update(problem.grad_x(x, y))
        ly.update(-problem.grad_y(x, y))
        xs.append(x), ys.append(y), xts.append(xt), yts.append(yt)
        calls.append(lx.oracle_calls + ly.oracle_calls)
        clock.append(time.perf_counter() - start)
    return CCHistory(np.array(xs), np.array(ys), np.array(xts), np.array(yts),
                     np.array(calls), include_first, np.array(clock) if timed else None)


def solve_ncnc(problem: GridGame, T: int, m: int, eta: float, seed: int,
               family: prt.Family | str = prt.Family.EXP_COORDINATE, optimistic: bool = True,
               workers: int = 1, include_first: bool = True,
               lanes: tuple[int, int] = (X_PLAYER, Y_PLAYER), timed: bool = False) -> NCHistory:
    """Nonconvex-nonconcave self-play over grids with tabulated guesses."""
    if not isinstance(problem, GridGame):
        raise TypeError("solve_ncnc needs a GridGame over two grids")
    if T < 1 or m < 1 or not eta > 0:
        raise ValueError("need T >= 1, m >= 1, eta > 0")
    fam = prt.Family(family)
    M = problem.payoff
    nx, ny = M.shape
    lx = NonconvexOFTPL(problem.grid_x, prt.PerturbationSpec(fam, eta, problem.grid_x.dim), m, workers=workers)
    ly = NonconvexOFTPL(problem.grid_y, prt.PerturbationSpec(fam, eta, problem.grid_y.dim), m, workers=workers)
    sx, sy = prt.RngStream(seed, (lanes[0],)), prt.RngStream(seed, (lanes[1],))
    Ps, Qs, Pts, Qts, calls, clock = [], [], [], [], [], []
    start = time.perf_counter()
    for t in range(1, T + 1):
        gx = gy = None
        Pt = Qt = None
        if optimistic and t > 1:
            Pt = lx.tilde(sx.child(t, "tilde"))
            Qt = ly.tilde(sy.child(t, "tilde"))
            gx, gy = M @ Qt.dense(ny), -(Pt.dense(nx) @ M)
        P = lx.step(gx, sx.child(t, "play"))
        Q = ly.step(gy, sy.child(t, "play"))
        lx.update(M @ Q.dense(ny))
        ly.update(-(P.dense(nx) @ M))
        Ps.append(P), Qs.append(Q), Pts.append(Pt), Qts.append(Qt)
        calls.append(lx.oracle_calls + ly.oracle_calls)
        clock.append(time.perf_counter() - start)
    return NCHistory(Ps, Qs, Pts, Qts, np.array(calls), nx, ny, include_first,
                     np.array(clock) if timed else None)


def history_gaps(problem, hist) -> np.ndarray:
    """Duality gap of the averaged iterates after every round."""
    a, b = hist.running_averages()
    return problem.gaps(a, b)


def expected_oracle_calls(T: int, m: int, optimistic: bool = True) -> int:
    return 2 * m + 4 * m * (T - 1) if optimistic else 2 * m * T


def gap_bound_cc(eta, D, C, L, alpha, T, m, psi1=1.0, psi2=1.0) -> float:
    """Four-term bound on the expected gap of averaged OFTPL self-play iterates."""
    s = psi1 * psi2 * D / math.sqrt(m)
    bound = 2.0 * eta * D / T
    if L == 0:
        return bound
    bound += 2.0 * L * s ** (1 + alpha) + 20.0 * C * L * L / eta * s ** (2 * alpha)
    base = 5.0 * C * L / eta
    if alpha >= 1:
        if base >= 1:
            raise BoundUndefinedError(f"5CL/eta = {base:.4g} >= 1 with alpha = 1")
        return bound
    return bound + 10.0 * L * base ** ((1 + alpha) / (1 - alpha))


class DefaultParams(NamedTuple):
    eta: float
    m_rule: str = "=T"

    def m(self, T: int) -> int:
        return T


def default_params_cc(d: int, D: float, L: float) -> DefaultParams:
    return DefaultParams(6.0 * d * D * (L + 1.0))


def default_params_ncnc(d: int, D: float, L: float) -> DefaultParams:
    return DefaultParams(10.0 * d * d * D * (L + 1.0))


def stability_C_cc(problem) -> float:
    """Stability constant ``dD`` of uniform-ball OFTPL (largest over the two players)."""
    return max(s.dim * diameter(s, Norm.L2) for s in (problem.set_x, problem.set_y))


def gradient_check(problem, n: int = 100, seed: int = 0, h: float = 1e-6) -> float:
    """Worst relative error between analytic gradients and central differences at sampled points."""
    rng = np.random.default_rng(seed)
    X, Y = problem.set_x.sample(rng, n), problem.set_y.sample(rng, n)
    worst = 0.0
    for x, y in zip(X, Y):
        for grad, which in ((problem.grad_x(x, y), 0), (problem.grad_y(x, y), 1)):
            base = x if which == 0 else y
            fd = np.empty_like(base)
            for i in range(base.size):
                e = np.zeros_like(base)
                e[i] = h
                if which == 0:
                    fd[i] = (problem.value(x + e, y) - problem.value(x - e, y)) / (2 * h)
                else:
                    fd[i] = (problem.value(x, y + e) - problem.value(x, y - e)) / (2 * h)
            scale = max(np.linalg.norm(grad), 1.0)
            worst = max(worst, float(np.linalg.norm(fd - grad) / scale))
    return worst
