"""Regret with certified comparators, stability and monotonicity probes, Wasserstein-1."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import perturbations as prt
from . import transport
from ._parallel import map_rows
from .convex import LossOracle
from .domains import FeasibleSet, Grid, Norm, NormTag
from .nonconvex import CumulativeLossTable, EmpiricalDistribution, pbr_indices
from .transport import TransportPlan


@dataclass(frozen=True)
class RegretRecord:
    t: int
    realized_loss: float
    cumulative_regret: float
    comparator_value: float
    comparator_certificate: float = 0.0


def comparator_convex(losses: Sequence[LossOracle], fset: FeasibleSet, tol: float = 1e-8,
                      max_iter: int = 10_000) -> tuple[np.ndarray, float]:
    """Minimize ``sum_t f_t`` over ``fset`` by Frank-Wolfe with line search.

    Returns the last iterate and its Frank-Wolfe gap, an upper bound on its
    suboptimality. Linear losses need a single oracle call and certify 0.
    """
    losses = list(losses)
    grad = lambda x: np.sum([f.gradient(x) for f in losses], axis=0)
    value = lambda x: float(sum(f.value(x) for f in losses))
    if all(f.is_linear for f in losses):
        return fset.lmo(grad(np.zeros(fset.dim))[None, :])[0], 0.0
    x = fset.lmo(np.zeros((1, fset.dim)))[0]
    cert = np.inf
    for _ in range(max_iter):
        g = grad(x)
        s = fset.lmo(g[None, :])[0]
        cert = max(float(g @ (x - s)), 0.0)
        if cert <= tol:
            break
        step = minimize_scalar(lambda a: value(x + a * (s - x)), bounds=(0.0, 1.0),
                               method="bounded", options={"xatol": 1e-12}).x
        x = x + step * (s - x)
    return x, cert


def comparator_grid(table: CumulativeLossTable | np.ndarray, grid: Grid) -> tuple[np.ndarray, float]:
    vals = table.values if isinstance(table, CumulativeLossTable) else np.asarray(table, dtype=float)
    return grid.points[int(np.argmin(vals))].copy(), 0.0


def linear_regret_curve(plays: np.ndarray, grads: np.ndarray, fset: FeasibleSet) -> list[RegretRecord]:
    """Per-round regret records for linear losses ``<grad_t, x>``; exact comparators."""
    plays, grads = np.atleast_2d(plays), np.atleast_2d(grads)
    realized = (plays * grads).sum(axis=1)
    cum = np.cumsum(grads, axis=0)
    best = (cum * fset.lmo(cum)).sum(axis=1)
    regret = np.cumsum(realized) - best
    return [RegretRecord(t + 1, float(realized[t]), float(regret[t]), float(best[t]))
            for t in range(len(realized))]


def regret_records(losses: Sequence[LossOracle], plays: np.ndarray, fset: FeasibleSet,
                   tol: float = 1e-8) -> list[RegretRecord]:
    """Per-round regret against a Frank-Wolfe comparator on each prefix."""
    out, total = [], 0.0
    for t, (f, x) in enumerate(zip(losses, plays), start=1):
        r = f.value(x)
        total += r
        xs, cert = comparator_convex(losses[:t], fset, tol)
        best = float(sum(g.value(xs) for g in losses[:t]))
        out.append(RegretRecord(t, r, total - best, best, cert))
    return out


@dataclass(frozen=True)
class ProbeResult:
    max_ratio: float
    stderr: float
    ratios: np.ndarray


def _ratio_with_se(diffs: np.ndarray, dg: float, out_norm: Norm) -> tuple[float, float]:
    mean = diffs.mean(axis=0)
    size = float(out_norm(mean))
    if size == 0:
        return 0.0, 0.0
    # delta method on the norm of the mean difference
    grad = mean / size if out_norm is Norm.L2 else (np.sign(mean) if out_norm is Norm.L1 else
                                                     (np.abs(mean) == np.abs(mean).max()) * np.sign(mean))
    proj = diffs @ grad
    se = float(proj.std(ddof=1) / np.sqrt(len(diffs)))
    return size / dg, se / dg


def stability_probe(spec: prt.PerturbationSpec, fset: FeasibleSet, n_pairs: int = 50,
                    m_mc: int = 100_000, seed: int = 0, g_scale: float = 1.0,
                    workers: int = 1) -> ProbeResult:
    """Largest observed ``||Phi(g1) - Phi(g2)|| / ||g1 - g2||_*`` over random pairs.

    ``Phi(g)`` is the Monte-Carlo mean of ``lmo(g - sigma)``; both members of a
    pair share the same ``sigma`` draws. Outputs are measured in the family's
    primal norm and gradients in its dual norm.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    root = prt.RngStream(seed, ("stability",))
    g = g_scale * root.child("pairs").generator().standard_normal((n_pairs, 2, fset.dim))
    ratios, ses = np.zeros(n_pairs), np.zeros(n_pairs)
    for k in range(n_pairs):
        g1, g2 = g[k]
        dg = float(spec.dual_norm(g1 - g2))
        if dg == 0:
            continue
        sigma = prt.sample(spec, root.child(k, "sigma"), size=m_mc)
        diffs = map_rows(lambda s: fset.lmo(g1 - s) - fset.lmo(g2 - s), sigma, workers)
        ratios[k], ses[k] = _ratio_with_se(diffs, dg, spec.primal_norm)
    k = int(np.argmax(ratios))
    return ProbeResult(float(ratios[k]), float(ses[k]), ratios)


def monotonicity_check(table: CumulativeLossTable | np.ndarray, grid: Grid, spec: prt.PerturbationSpec,
                       n_pairs: int = 1000, seed: int = 0) -> float:
    """Minimum of ``<x(s1) - x(s2), s1 - s2>`` over sampled perturbation pairs."""
    vals = table.values if isinstance(table, CumulativeLossTable) else np.asarray(table, dtype=float)
    root = prt.RngStream(seed, ("monotonicity",))
    s1 = prt.sample(spec, root.child(0), size=n_pairs)
    s2 = prt.sample(spec, root.child(1), size=n_pairs)
    pts = grid.points
    x1, x2 = pts[pbr_indices(vals, grid, s1)], pts[pbr_indices(vals, grid, s2)]
    return float(((x1 - x2) * (s1 - s2)).sum(axis=1).min())


def _ground(kind) -> Norm:
    if isinstance(kind, NormTag):
        return kind.kind
    return Norm(kind)


def wasserstein1(P: EmpiricalDistribution, Q: EmpiricalDistribution, ground=Norm.L1,
                 points_P=None, points_Q=None, method: str = "auto") -> tuple[float, TransportPlan]:
    """Exact W1 between two weighted supports; plan indices refer to ``P.support`` / ``Q.support`` positions.

    ``points_P`` / ``points_Q`` are coordinate tables indexed by grid index.
    ``method`` is "auto" (closed form on the line, simplex otherwise),
    "simplex" or "quantile".
    """
    transport.check_size(len(P), len(Q))
    xa = np.asarray(points_P, dtype=float)[P.support]
    xb = np.asarray(points_Q if points_Q is not None else points_P, dtype=float)[Q.support]
    xa, xb = xa.reshape(len(P), -1), xb.reshape(len(Q), -1)
    if xa.shape[1] != xb.shape[1]:
        raise ValueError("supports live in different dimensions")
    norm = _ground(ground)
    C = norm(xa[:, None, :] - xb[None, :, :])
    one_d = xa.shape[1] == 1
    if method == "quantile" or (method == "auto" and one_d):
        if not one_d:
            raise ValueError("quantile coupling needs 1-d supports")
        plan = transport.quantile_plan(xa, P.weights, xb, Q.weights, C)
    elif method in ("auto", "simplex"):
        plan = transport.transport_simplex(P.weights, Q.weights, C)
    else:
        raise ValueError(f"unknown method {method!r}")
    return plan.cost, plan
