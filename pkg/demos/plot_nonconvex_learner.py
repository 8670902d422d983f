"""
Nonconvex losses on a grid
==========================

The nonconvex learner plays an empirical distribution of perturbed best
responses over a finite grid. Losses here are random smooth trigonometric
tables; the comparator is the exact argmin of the cumulative table.
"""

import numpy as np

from oftpl.domains import Grid
from oftpl.games import random_trig
from oftpl.metrics import comparator_grid
from oftpl.nonconvex import NonconvexOFTPL, regret_bound_nonconvex, tuned_eta_nonconvex
from oftpl.perturbations import PerturbationSpec, RngStream

grid = Grid(axes=[np.linspace(0, 1, 17)] * 2)
T, m = 256, 8
tables = [random_trig(grid, Grid(axes=[[0.0]]), terms=3, seed=k, lipschitz=1.0).payoff[:, 0] for k in range(T)]

eta = tuned_eta_nonconvex(2, 1.0, T)
lr = NonconvexOFTPL(grid, PerturbationSpec.exp_coordinate(eta, 2), m)
realized = 0.0
for t, f in enumerate(tables, start=1):
    P = lr.step(None, RngStream(0, (0, t, "play")))
    realized += P.expect(f)
    lr.update(f)

best, _ = comparator_grid(lr.table, grid)
best_value = lr.table.values.min()
print(f"expected regret {realized - best_value:.2f} against best point {best}")
print(f"bound {regret_bound_nonconvex(eta, 2.0, 2, 1.0, T):.1f} (eta = {eta:.1f})")
print("last distribution support size", len(P))
