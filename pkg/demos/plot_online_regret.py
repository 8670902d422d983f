"""
Online linear losses: FTPL against optimistic FTPL
==================================================

Random unit gradients on the unit disc. Plain FTPL with tuned eta grows like
sqrt(T); with a perfect guess of the next gradient the regret stays bounded.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from oftpl.convex import ConvexOFTPL, Guess, linear_loss, play, regret_bound_convex, tuned_eta
from oftpl.domains import Ball2
from oftpl.metrics import linear_regret_curve
from oftpl.perturbations import PerturbationSpec

fset = Ball2.unit(2)
T = 2048
z = np.random.default_rng(0).standard_normal((T, 2))
grads = z / np.linalg.norm(z, axis=1, keepdims=True)
losses = [linear_loss(g) for g in grads]

eta = tuned_eta(2, 1.0, T)
ftpl = play(ConvexOFTPL(fset, PerturbationSpec.uniform_ball2(eta, 2), 1), losses, Guess.ZERO, seed=1)
exact = play(ConvexOFTPL(fset, PerturbationSpec.uniform_ball2(1.0, 2), 64), losses, Guess.EXACT, seed=1)

curves = {name: [r.cumulative_regret for r in linear_regret_curve(run.plays, grads, fset)]
          for name, run in (("FTPL, tuned eta", ftpl), ("exact guess, m=64", exact))}
bound = regret_bound_convex(eta, 2.0, 2, 1.0, 0.0, 1.0, T, 1)
print(f"final regret: " + ", ".join(f"{k} {v[-1]:.1f}" for k, v in curves.items()) + f"; bound {bound:.1f}")

# %%
fig, ax = plt.subplots(figsize=(5.5, 4))
for name, c in curves.items():
    ax.plot(np.arange(1, T + 1), c, label=name)
ax.axhline(bound, ls="--", c="k", lw=0.8, label="bound at T")
ax.set_xlabel("t")
ax.set_ylabel("cumulative regret")
ax.legend()
fig.tight_layout()
fig.savefig("online_regret.svg", metadata={"Date": None})
