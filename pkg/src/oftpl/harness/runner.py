"""Execute experiment configs: per-iteration CSV records plus a summary JSON."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .. import domains, games, metrics
from .. import perturbations as prt
from ..convex import ConvexOFTPL, regret_bound_convex, tuned_eta
from ..domains import Grid, Norm
from ..nonconvex import NonconvexOFTPL, argmin_gaps, regret_bound_nonconvex, tuned_eta_nonconvex
from .config import ExperimentConfig

log = logging.getLogger("oftpl")

CSV_VERSION = "oftpl-csv/1"
CSV_COLUMNS = ("seed", "T", "t", "gap_or_regret", "comparator_certificate", "oracle_calls_cum", "elapsed_ms", "bound")


@dataclass(frozen=True)
class OnlineProblem:
    fset: domains.FeasibleSet
    G: float
    losses: dict

    def gradients(self, T: int, seed: int) -> np.ndarray:
        """The loss sequence is a function of the seed only (shared across learners)."""
        kind = self.losses.get("type", "random_linear")
        if kind == "random_linear":
            z = prt.RngStream(seed, ("env",)).generator().standard_normal((T, self.fset.dim))
            return self.G * z / np.sqrt((z * z).sum(axis=1))[:, None]
        raise ValueError(f"unknown online loss type {kind!r}")

    def tables(self, T: int, seed: int) -> np.ndarray:
        """Random smooth losses ``a cos(<u, x> + phi)`` tabulated on the grid, Lipschitz (L1) at most G."""
        if self.losses.get("type", "random_trig") != "random_trig":
            raise ValueError(f"unknown online loss type {self.losses.get('type')!r}")
        rng = prt.RngStream(seed, ("env",)).generator()
        d = self.fset.dim
        u = rng.uniform(-np.pi, np.pi, (T, d))
        phi = rng.uniform(0, 2 * np.pi, T)
        a = self.G / np.abs(u).max(axis=1) * rng.uniform(-1, 1, T)
        return a[:, None] * np.cos(u @ self.fset.points.T + phi[:, None])


def _set(rec):
    if not isinstance(rec, dict):
        raise TypeError("set records must be objects")
    return domains.from_record(rec)


def _grid(rec) -> Grid:
    g = _set(rec)
    if not isinstance(g, Grid):
        raise TypeError("expected a grid record")
    return g


def _matrix(cfg: ExperimentConfig, spec):
    if isinstance(spec, str):
        return np.loadtxt(cfg.resolve(spec), delimiter=",", ndmin=2)
    return np.asarray(spec, dtype=float)


def build_problem(cfg: ExperimentConfig):
    p = cfg.problem
    if cfg.kind == "online_convex":
        return OnlineProblem(_set(p["set"]), float(p.get("G", 1.0)), p.get("losses", {"type": "random_linear"}))
    if cfg.kind == "online_nonconvex":
        return OnlineProblem(_grid(p["grid"]), float(p.get("G", 1.0)), p.get("losses", {"type": "random_trig"}))
    if cfg.kind == "probe_stability":
        return _set(p["set"])
    if cfg.kind == "probe_monotonicity":
        return _grid(p["grid"])
    kind = p.get("type")
    if cfg.kind == "game_cc":
        if kind == "random_bilinear":
            return games.BilinearGame.random(int(p["d"]), int(p.get("seed", 0)), float(p.get("op_norm", 1.0)),
                                             float(p.get("radius", 1.0)))
        if kind == "bilinear":
            A = _matrix(cfg, p["A"])
            b, c = p.get("b"), p.get("c")
            return games.BilinearGame(A, None if b is None else np.asarray(b, float),
                                      None if c is None else np.asarray(c, float), _set(p["set_x"]), _set(p["set_y"]))
        raise ValueError(f"unknown game_cc problem type {kind!r}")
    if kind == "matching_pennies":
        return games.matching_pennies()
    if kind == "sin_products":
        return games.sin_products(int(p.get("n", 64)), int(p.get("terms", 3)), int(p.get("seed", 0)))
    if kind == "random_trig":
        return games.random_trig(_grid(p["grid_x"]), _grid(p["grid_y"]), int(p.get("terms", 4)),
                                 int(p.get("seed", 0)), float(p.get("lipschitz", 1.0)))
    if kind == "grid_game":
        gx, gy = _grid(p["grid_x"]), _grid(p["grid_y"])
        M = _matrix(cfg, p.get("payoff_csv", p.get("payoff")))
        return games.GridGame(M, gx, gy, float(p.get("G", math.nan)), float(p.get("L", math.nan)))
    raise ValueError(f"unknown game_ncnc problem type {kind!r}")


@dataclass
class RunResult:
    seed: int
    T: int
    values: np.ndarray
    certificates: np.ndarray
    oracle_calls: np.ndarray
    elapsed: np.ndarray | None
    bound: float | None
    eta: float
    m: int
    extra: dict = field(default_factory=dict)

    @property
    def final(self) -> float:
        return float(self.values[-1])


def _family(cfg) -> prt.Family:
    return prt.Family(cfg.perturbation["type"])


def resolve_eta(cfg: ExperimentConfig, problem, T: int) -> float:
    if cfg.eta != "paper_default":
        return float(cfg.eta)
    if cfg.kind == "game_cc":
        d = max(problem.set_x.dim, problem.set_y.dim)
        D = max(domains.diameter(problem.set_x, Norm.L2), domains.diameter(problem.set_y, Norm.L2))
        return games.default_params_cc(d, D, problem.L).eta
    if cfg.kind == "game_ncnc":
        d = max(problem.grid_x.dim, problem.grid_y.dim)
        D = max(domains.diameter(problem.grid_x, Norm.L1), domains.diameter(problem.grid_y, Norm.L1))
        return games.default_params_ncnc(d, D, problem.L).eta
    if cfg.kind == "online_convex":
        return tuned_eta(problem.fset.dim, problem.G, T)
    if cfg.kind == "online_nonconvex":
        return tuned_eta_nonconvex(problem.fset.dim, problem.G, T)
    raise ValueError(f"{cfg.kind} has no default eta")


def _guess_error(guess: str, G: float) -> float:
    return {"zero": G, "last_gradient": 2.0 * G, "exact": 0.0}[guess]


def run_online_convex(cfg, problem: OnlineProblem, T: int, seed: int, workers: int) -> RunResult:
    eta, m = resolve_eta(cfg, problem, T), cfg.m_for(T)
    fset = problem.fset
    grads = problem.gradients(T, seed)
    learner = ConvexOFTPL(fset, prt.PerturbationSpec(_family(cfg), eta, fset.dim), m, workers=workers)
    root = prt.RngStream(seed, (games.X_PLAYER,))
    plays, calls, clock = [], [], []
    start = time.perf_counter()
    for t in range(1, T + 1):
        g = {"zero": None, "last_gradient": learner.last_grad, "exact": grads[t - 1]}[cfg.guess]
        x, _ = learner.step(g, root.child(t, "play"))
        learner.update(grads[t - 1])
        plays.append(x)
        calls.append(learner.oracle_calls)
        clock.append(time.perf_counter() - start)
    recs = metrics.linear_regret_curve(np.array(plays), grads, fset)
    D = domains.diameter(fset, Norm.L2)
    bound = None
    if _family(cfg) is prt.Family.UNIFORM_BALL2:
        bound = regret_bound_convex(eta, D, fset.dim, _guess_error(cfg.guess, problem.G), 0.0, 1.0, T, m)
    return RunResult(seed, T, np.array([r.cumulative_regret for r in recs]),
                     np.array([r.comparator_certificate for r in recs]), np.array(calls),
                     np.array(clock) if cfg.timing else None, bound, eta, m)


def run_online_nonconvex(cfg, problem: OnlineProblem, T: int, seed: int, workers: int) -> RunResult:
    eta, m = resolve_eta(cfg, problem, T), cfg.m_for(T)
    grid = problem.fset
    F = problem.tables(T, seed)
    learner = NonconvexOFTPL(grid, prt.PerturbationSpec(_family(cfg), eta, grid.dim), m, workers=workers)
    root = prt.RngStream(seed, (games.X_PLAYER,))
    realized, calls, clock = [], [], []
    start = time.perf_counter()
    for t in range(1, T + 1):
        g = {"zero": None, "last_gradient": learner.last_values, "exact": F[t - 1]}[cfg.guess]
        P = learner.step(g, root.child(t, "play"))
        realized.append(P.expect(F[t - 1]))
        learner.update(F[t - 1])
        calls.append(learner.oracle_calls)
        clock.append(time.perf_counter() - start)
    best = np.cumsum(F, axis=0).min(axis=1)
    regret = np.cumsum(realized) - best
    bound = None
    if _family(cfg) is prt.Family.EXP_COORDINATE:
        D = domains.diameter(grid, Norm.L1)
        bound = regret_bound_nonconvex(eta, D, grid.dim, _guess_error(cfg.guess, problem.G), T)
    return RunResult(seed, T, regret, np.zeros(T), np.array(calls),
                     np.array(clock) if cfg.timing else None, bound, eta, m)


def run_game(cfg, problem, T: int, seed: int, workers: int) -> RunResult:
    eta, m = resolve_eta(cfg, problem, T), cfg.m_for(T)
    solve = games.solve_cc if cfg.kind == "game_cc" else games.solve_ncnc
    hist = solve(problem, T, m, eta, seed, family=_family(cfg), optimistic=cfg.guess == "optimistic",
                 workers=workers, include_first=cfg.include_first, timed=cfg.timing)
    gaps = games.history_gaps(problem, hist)
    bound = None
    if cfg.kind == "game_cc" and _family(cfg) is prt.Family.UNIFORM_BALL2 and cfg.guess == "optimistic":
        C = games.stability_C_cc(problem)
        D = max(domains.diameter(problem.set_x, Norm.L2), domains.diameter(problem.set_y, Norm.L2))
        try:
            bound = games.gap_bound_cc(eta, D, C, problem.L, problem.alpha, T, m)
        except games.BoundUndefinedError as exc:
            log.warning("gap bound unavailable at T=%d: %s", T, exc)
    return RunResult(seed, T, gaps, np.zeros(T), hist.oracle_calls, hist.elapsed, bound, eta, m,
                     {"initial_gap": float(gaps[0])})


RUNNERS = {"online_convex": run_online_convex, "online_nonconvex": run_online_nonconvex,
           "game_cc": run_game, "game_ncnc": run_game}


def fit_slope(Ts, values, drop_first: bool = True) -> dict:
    """OLS slope of log(value) on log(T), optionally without the smallest T."""
    Ts, values = np.asarray(Ts, dtype=float), np.asarray(values, dtype=float)
    order = np.argsort(Ts)
    Ts, values = Ts[order], values[order]
    if drop_first and len(Ts) > 2:
        Ts, values = Ts[1:], values[1:]
    ok = values > 0
    if ok.sum() < 2:
        return {"slope": None, "stderr": None, "points": int(ok.sum())}
    fit = stats.linregress(np.log(Ts[ok]), np.log(values[ok]))
    se = float(fit.stderr) if ok.sum() > 2 else None
    return {"slope": float(fit.slope), "stderr": se, "intercept": float(fit.intercept), "points": int(ok.sum())}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def csv_text(results: list[RunResult]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        for k in range(r.T):
            ms = None if r.elapsed is None else round(1000.0 * r.elapsed[k], 3)
            w.writerow([r.seed, r.T, k + 1, _fmt(r.values[k]), _fmt(r.certificates[k]),
                        _fmt(int(r.oracle_calls[k])), _fmt(ms), _fmt(r.bound)])
    return buf.getvalue()


def execute(cfg: ExperimentConfig, threads: int | None = None, seeds: list[int] | None = None) -> list[RunResult]:
    """All (T, seed) runs, ordered by T then seed; parallel across seeds and within rounds."""
    threads = threads or cfg.threads
    seeds = seeds or cfg.seeds
    problem = build_problem(cfg)
    fn = RUNNERS[cfg.kind]
    jobs = [(T, s) for T in cfg.T for s in seeds]
    if threads <= 1:
        return [fn(cfg, problem, T, s, 1) for T, s in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(cfg, problem, job[0], job[1], threads), jobs))


def summarize(cfg: ExperimentConfig, results: list[RunResult], wall: float, threads: int) -> dict:
    per_T = []
    for T in cfg.T:
        rs = [r for r in results if r.T == T]
        finals = [r.final for r in rs]
        entry = {
            "T": T, "m": rs[0].m, "eta": rs[0].eta, "seeds": [r.seed for r in rs], "final": finals,
            "median": float(np.median(finals)), "bound": rs[0].bound,
            "oracle_calls": int(rs[0].oracle_calls[-1]),
        }
        if cfg.kind.startswith("game"):
            entry["initial_median"] = float(np.median([r.extra["initial_gap"] for r in rs]))
            if cfg.guess == "optimistic":
                entry["oracle_calls_expected"] = games.expected_oracle_calls(T, rs[0].m)
        per_T.append(entry)
    out = {
        "schema": "oftpl-summary/1", "name": cfg.name, "kind": cfg.kind, "config_hash": cfg.config_hash(),
        "guess": cfg.guess, "threads": threads, "wall_clock_s": round(wall, 3), "results": per_T,
        "fit": fit_slope([e["T"] for e in per_T], [e["median"] for e in per_T]) if len(per_T) > 1 else None,
    }
    return out


def run_probe(cfg: ExperimentConfig, seeds: list[int] | None = None) -> tuple[str, dict]:
    """Probe kinds write a small CSV of probe rows and a summary."""
    seeds = seeds or cfg.seeds
    obj = build_problem(cfg)
    fam = _family(cfg)
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}-probe\n")
    w = csv.writer(buf, lineterminator="\n")
    summary: dict = {"schema": "oftpl-summary/1", "name": cfg.name, "kind": cfg.kind,
                     "config_hash": cfg.config_hash()}
    if cfg.kind == "probe_stability":
        etas = cfg.probe.get("etas", [cfg.eta if cfg.eta != "paper_default" else 1.0])
        n_pairs, m_mc = int(cfg.probe.get("n_pairs", 50)), int(cfg.probe.get("m_mc", 100_000))
        w.writerow(["seed", "eta", "max_ratio", "stderr", "bound"])
        rows = []
        for s in seeds:
            for eta in etas:
                spec = prt.PerturbationSpec(fam, float(eta), obj.dim)
                res = metrics.stability_probe(spec, obj, n_pairs, m_mc, s, workers=cfg.threads)
                try:
                    bound = prt.stability_bound(spec, obj)
                except prt.NoStabilityBoundError:
                    bound = None
                rows.append({"seed": s, "eta": float(eta), "max_ratio": res.max_ratio, "stderr": res.stderr,
                             "bound": bound})
                w.writerow([s, _fmt(float(eta)), _fmt(res.max_ratio), _fmt(res.stderr), _fmt(bound)])
        summary["probes"] = rows
        med = [float(np.median([r["max_ratio"] for r in rows if r["eta"] == float(e)])) for e in etas]
        summary["fit"] = fit_slope(etas, med, drop_first=False) if len(etas) > 1 else None
        summary["within_bound"] = all(r["bound"] is None or r["max_ratio"] <= 1.1 * r["bound"] for r in rows)
    else:
        n_tables = int(cfg.probe.get("n_tables", 10))
        n_pairs = int(cfg.probe.get("n_pairs", 1000))
        scale = float(cfg.probe.get("table_scale", 1.0))
        eta = float(cfg.eta) if cfg.eta != "paper_default" else 1.0
        spec = prt.PerturbationSpec(fam, eta, obj.dim)
        w.writerow(["seed", "table", "min_inner_product", "min_argmin_gap"])
        worst, gap_min = math.inf, math.inf
        for s in seeds:
            tables = scale * prt.RngStream(s, ("tables",)).generator().standard_normal((n_tables, len(obj)))
            for k, table in enumerate(tables):
                v = metrics.monotonicity_check(table, obj, spec, n_pairs, seed=s * 1_000_003 + k)
                sig = prt.sample(spec, prt.RngStream(s, ("gaps", k)), size=n_pairs)
                gmin = float(argmin_gaps(table, obj, sig).min())
                worst, gap_min = min(worst, v), min(gap_min, gmin)
                w.writerow([s, k, _fmt(v), _fmt(gmin)])
        summary.update({"min_inner_product": worst, "min_argmin_gap": gap_min, "eta": eta})
    return buf.getvalue(), summary


def write_outputs(cfg: ExperimentConfig, csv_body: str, summary: dict, out_dir: Path | str | None = None) -> tuple[Path, Path]:
    out = Path(out_dir) if out_dir is not None else cfg.resolve(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / f"{cfg.name}.csv", out / f"{cfg.name}.summary.json"
    csv_path.write_text(csv_body)
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def run(cfg: ExperimentConfig, threads: int | None = None, seeds: list[int] | None = None,
        out_dir: Path | str | None = None) -> dict:
    threads = threads or cfg.threads
    start = time.perf_counter()
    if cfg.kind.startswith("probe"):
        body, summary = run_probe(cfg, seeds)
    else:
        results = execute(cfg, threads, seeds)
        body = csv_text(results)
        summary = summarize(cfg, results, time.perf_counter() - start, threads)
    summary["wall_clock_s"] = round(time.perf_counter() - start, 3)
    csv_path, json_path = write_outputs(cfg, body, summary, out_dir)
    summary["paths"] = {"csv": str(csv_path), "summary": str(json_path)}
    return summary
