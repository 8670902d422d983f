"""
Mixed strategies on grid games
==============================

Matching pennies and a smooth 64-point game. Each player returns an empirical
distribution per round; the gap is evaluated on the running average of those
distributions. The sweep over eta shows how strongly the one-sided
exponential perturbation scale controls the gap at T = 256.
"""

import numpy as np

from oftpl.games import default_params_ncnc, history_gaps, matching_pennies, sin_products, solve_ncnc

for game, name in ((matching_pennies(), "matching pennies"), (sin_products(64), "sin_products")):
    default = default_params_ncnc(1, 1.0, game.L).eta
    print(f"{name}: L = {game.L:.2f}, default eta = {default:.1f}")
    for eta in (default, 10.0, 2.0):
        h = solve_ncnc(game, 256, 256, eta, seed=0)
        gaps = history_gaps(game, h)
        print(f"  eta {eta:6.1f}: gap at t=1 {gaps[0]:.3f}, at t=256 {gaps[-1]:.4f}")
    P, Q = h.average()
    print("  mixture support sizes", len(P), len(Q))
