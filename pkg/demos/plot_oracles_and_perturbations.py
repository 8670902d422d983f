"""
Feasible sets, linear oracles and perturbations
===============================================

Every learner in the package touches its domain only through a linear
minimization oracle. This script exercises the oracle on each set type and
draws the three perturbation families.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from oftpl.domains import Ball2, Box, Grid, Norm, Simplex, diameter
from oftpl.perturbations import PerturbationSpec, RngStream, expected_dual_norm, sample, stability_bound

g = np.array([3.0, 4.0])
for s in (Ball2.unit(2), Box(-np.ones(2), np.ones(2)), Simplex(2), Grid(axes=[[0, 0.5, 1], [0, 1]])):
    print(f"{type(s).__name__:7s} lmo(g) = {s.lmo(g)}  L2 diameter = {diameter(s, Norm.L2):.3f}")

# %%
# Perturbations come from named lanes, so the same lane always gives the same draws.

specs = [PerturbationSpec.uniform_ball2(1.0, 2), PerturbationSpec.exp_coordinate(1.0, 2),
         PerturbationSpec.gaussian_iso(1.0, 2)]
fig, axes = plt.subplots(1, 3, figsize=(10, 3.4))
for ax, spec in zip(axes, specs):
    s = sample(spec, RngStream(0, ("demo", spec.family.value)), size=3000)
    ax.scatter(s[:, 0], s[:, 1], s=2, alpha=0.4)
    ax.set_title(f"{spec.family.value}\nE||sigma||_* = {expected_dual_norm(spec):.3f}")
    ax.set_aspect("equal")
fig.tight_layout()
fig.savefig("perturbations.svg", metadata={"Date": None})

# %%
# The stability constant shrinks as 1/eta.

for eta in (1.0, 2.0, 4.0):
    print("eta", eta, "stability", stability_bound(PerturbationSpec.uniform_ball2(eta, 2), Ball2.unit(2)))
