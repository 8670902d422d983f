"""
Wasserstein distances and empirical probes
==========================================

Exact W1 via the transportation simplex, checked against the closed form on
the line. Then the stability probe on the unit disc and the monotonicity
check of the perturbed best response.
"""

import numpy as np

from oftpl.domains import Ball2, Grid, Norm
from oftpl.metrics import monotonicity_check, stability_probe, wasserstein1
from oftpl.nonconvex import EmpiricalDistribution
from oftpl.perturbations import PerturbationSpec
from oftpl.transport import w1_1d

rng = np.random.default_rng(0)
xa, xb = rng.normal(size=(6, 1)), rng.normal(size=(4, 1))
P = EmpiricalDistribution(np.arange(6), rng.dirichlet(np.ones(6)))
Q = EmpiricalDistribution(np.arange(4), rng.dirichlet(np.ones(4)))
cost, plan = wasserstein1(P, Q, Norm.L1, xa, xb, method="simplex")
print(f"simplex {cost:.12f}  closed form {w1_1d(xa, P.weights, xb, Q.weights):.12f}")
print("plan entries", [(i, j, round(w, 4)) for i, j, w in plan.entries])

# %%
for eta in (1.0, 2.0, 4.0, 8.0):
    res = stability_probe(PerturbationSpec.uniform_ball2(eta, 2), Ball2.unit(2), n_pairs=20, m_mc=20_000)
    print(f"eta {eta}: max ratio {res.max_ratio:.3f} +- {res.stderr:.3f}  (bound {4 / eta:.2f})")

# %%
grid = Grid(axes=[np.linspace(0, 1, 9)] * 2)
worst = min(monotonicity_check(rng.normal(size=len(grid)), grid, PerturbationSpec.exp_coordinate(1.0, 2), 1000, k)
            for k in range(10))
print("min inner product", worst)
