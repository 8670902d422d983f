"""Acceptance suite: one test per criterion, summarised at the end of the pytest run."""

import itertools
import time
from pathlib import Path

import numpy as np
import pytest

from oftpl.domains import Ball2, Box, Grid, Simplex
from oftpl.harness import runner
from oftpl.harness.config import load
from oftpl.metrics import monotonicity_check, stability_probe, wasserstein1
from oftpl.nonconvex import EmpiricalDistribution
from oftpl.perturbations import PerturbationSpec, stability_bound
from oftpl.transport import w1_1d

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
THREADS = 8


def sweep(name, out, threads=THREADS):
    cfg = load(CONFIGS / f"{name}.json")
    start = time.perf_counter()
    summary = runner.run(cfg, threads=threads, out_dir=out)
    return summary, time.perf_counter() - start


@pytest.fixture(scope="module")
def out(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="module")
def ftpl_regret(out):
    return sweep("ftpl_regret", out / "c4")


@pytest.fixture(scope="module")
def bilinear(out):
    return sweep("bilinear_optimistic", out / "c6")


def random_set(rng):
    d = int(rng.integers(1, 7))
    kind = rng.integers(4)
    if kind == 0:
        return Ball2(rng.normal(size=d), float(rng.uniform(0.1, 3)))
    if kind == 1:
        lo = rng.normal(size=d)
        return Box(lo, lo + rng.uniform(0.1, 2, d))
    if kind == 2:
        return Simplex(d)
    d = min(d, 3)
    return Grid(axes=[np.sort(rng.choice(np.linspace(-2, 2, 41), int(rng.integers(1, 8)), replace=False))
                      for _ in range(d)])


@pytest.mark.criterion("C1", "linear oracle beats random feasible points")
def test_c1_oracle_exactness(record):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = np.inf
    for _ in range(500):
        s = random_set(rng)
        g = rng.normal(size=s.dim) * rng.choice([1e-3, 1.0, 1e3])
        p = s.lmo(g[None, :])[0]
        worst = min(worst, float((s.sample(rng, 10_000) @ g - g @ p).min()))
    elapsed = time.perf_counter() - start
    record(min_margin=worst, seconds=elapsed)
    assert worst >= -1e-9
    assert elapsed < 5


@pytest.mark.criterion("C2", "perturbed best response is monotone")
def test_c2_monotonicity(record):
    grid = Grid(axes=[np.linspace(0, 1, 9)] * 2)
    spec = PerturbationSpec.exp_coordinate(1.0, 2)
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    worst = min(monotonicity_check(rng.normal(size=len(grid)), grid, spec, 1000, seed=k) for k in range(10))
    elapsed = time.perf_counter() - start
    record(min_inner_product=worst, seconds=elapsed)
    assert worst >= -1e-9
    assert elapsed < 10


@pytest.mark.criterion("C3", "uniform-ball stability within 1.1 dD/eta, ratio ~ 1/eta")
def test_c3_stability(record):
    ball = Ball2.unit(2)
    etas = [1.0, 2.0, 4.0, 8.0]
    start = time.perf_counter()
    ratios, bounds = [], []
    for eta in etas:
        spec = PerturbationSpec.uniform_ball2(eta, 2)
        ratios.append(stability_probe(spec, ball, n_pairs=50, m_mc=100_000, seed=0, workers=THREADS).max_ratio)
        bounds.append(stability_bound(spec, ball))
    elapsed = time.perf_counter() - start
    slope = runner.fit_slope(etas, ratios, drop_first=False)["slope"]
    record(max_ratio=ratios, bound=bounds, slope=slope, seconds=elapsed)
    assert all(r <= 1.1 * b for r, b in zip(ratios, bounds))
    assert -1.25 <= slope <= -0.75
    assert elapsed < 120


@pytest.mark.criterion("C4", "FTPL regret under bound with sqrt(T) growth")
def test_c4_ftpl_regret(ftpl_regret, record):
    s, elapsed = ftpl_regret
    res = s["results"]
    record(slope=s["fit"]["slope"], worst_median_over_bound=max(e["median"] / e["bound"] for e in res),
           seconds=elapsed)
    assert all(e["median"] <= e["bound"] for e in res)
    assert 0.4 <= s["fit"]["slope"] <= 0.62
    assert elapsed < 60


@pytest.mark.criterion("C5", "exact guesses cut regret to <= 10% of FTPL")
def test_c5_optimism_pays(ftpl_regret, out, record):
    exact, elapsed = sweep("oftpl_exact_guess", out / "c5")
    ftpl_median = next(e["median"] for e in ftpl_regret[0]["results"] if e["T"] == 4096)
    med = exact["results"][0]["median"]
    record(exact_median=med, ftpl_median=ftpl_median, seconds=elapsed)
    assert med <= 0.1 * ftpl_median
    assert elapsed < 120


@pytest.mark.criterion("C6", "convex-concave gap under explicit bound, slope <= -0.75")
def test_c6_convex_concave_rate(bilinear, record):
    s, elapsed = bilinear
    res = s["results"]
    last = res[-1]
    record(slope=s["fit"]["slope"], median_T256=last["median"], bound_T256=last["bound"],
           oracle_calls=last["oracle_calls"], seconds=elapsed)
    assert all(e["bound"] is not None and e["median"] <= e["bound"] for e in res)
    assert s["fit"]["slope"] <= -0.75
    assert last["T"] == 256 and last["oracle_calls"] == 4 * 256 * 255 + 512
    assert elapsed < 180


@pytest.mark.criterion("C7", "plain FTPL self-play slower than optimistic")
def test_c7_ftpl_vs_oftpl(bilinear, out, record):
    ftpl, _ = sweep("bilinear_ftpl", out / "c7")
    opt_med = bilinear[0]["results"][-1]["median"]
    ftpl_med = ftpl["results"][-1]["median"]
    record(ftpl_slope=ftpl["fit"]["slope"], ftpl_median=ftpl_med, optimistic_median=opt_med)
    assert ftpl["fit"]["slope"] >= -0.7
    assert ftpl_med > opt_med


@pytest.mark.criterion("C8", "nonconvex-nonconcave mixture gap rate")
def test_c8_nonconvex_rate(out, record):
    start = time.perf_counter()
    rows = {}
    for name in ("matching_pennies", "sin_products"):
        s, _ = sweep(name, out / "c8")
        last = s["results"][-1]
        rows[name] = (s["fit"]["slope"], last["median"], last["initial_median"])
    elapsed = time.perf_counter() - start
    record(**{f"{k}_slope": v[0] for k, v in rows.items()},
           **{f"{k}_final_over_initial": v[1] / v[2] for k, v in rows.items()}, seconds=elapsed)
    assert elapsed < 300
    for slope, final, initial in rows.values():
        assert slope <= -0.6
        assert final < 0.1 * initial


@pytest.mark.criterion("C9", "transport solver exact against closed forms")
def test_c9_wasserstein(record):
    rng = np.random.default_rng(99)
    start = time.perf_counter()
    err_1d = 0.0
    for _ in range(1000):
        n, m = rng.integers(1, 13, 2)
        xa, xb = rng.normal(size=(n, 1)), rng.normal(size=(m, 1))
        P = EmpiricalDistribution(np.arange(n), rng.dirichlet(np.ones(n)))
        Q = EmpiricalDistribution(np.arange(m), rng.dirichlet(np.ones(m)))
        general = wasserstein1(P, Q, points_P=xa, points_Q=xb, method="simplex")[0]
        err_1d = max(err_1d, abs(general - w1_1d(xa, P.weights, xb, Q.weights)))
    err_perm = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 5))
        xa, xb = rng.normal(size=(n, 3)), rng.normal(size=(n, 3))
        U = EmpiricalDistribution(np.arange(n), np.full(n, 1.0 / n))
        C = np.abs(xa[:, None] - xb[None]).sum(axis=2)
        brute = min(C[np.arange(n), list(p)].mean() for p in itertools.permutations(range(n)))
        err_perm = max(err_perm, abs(wasserstein1(U, U, points_P=xa, points_Q=xb)[0] - brute))
    elapsed = time.perf_counter() - start
    record(max_err_1d=err_1d, max_err_perm=err_perm, seconds=elapsed)
    assert err_1d <= 1e-9 and err_perm <= 1e-9
    assert elapsed < 10


@pytest.mark.criterion("C10", "CSV bytes identical for 1 and 8 workers")
def test_c10_determinism(bilinear, out, record):
    one, _ = sweep("bilinear_optimistic", out / "c10", threads=1)
    a = Path(one["paths"]["csv"]).read_bytes()
    b = Path(bilinear[0]["paths"]["csv"]).read_bytes()
    record(bytes=len(a), identical=a == b)
    assert a == b
