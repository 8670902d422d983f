"""Optimistic follow-the-perturbed-leader learners and game solvers."""

from .convex import ConvexOFTPL, Guess, LossOracle, linear_loss, quadratic_loss, regret_bound_convex
from .domains import Ball2, Box, Grid, Norm, NormTag, Simplex, contains, diameter, enumerate_points, linear_minimize
from .games import (BilinearGame, GridGame, SaddleProblem, default_params_cc, default_params_ncnc,
                    duality_gap, gap_bound_cc, solve_cc, solve_ncnc)
from .metrics import comparator_convex, comparator_grid, monotonicity_check, stability_probe, wasserstein1
from .nonconvex import CumulativeLossTable, EmpiricalDistribution, NonconvexOFTPL, pbr_oracle, sample_action
from .perturbations import PerturbationSpec, RngStream, expected_dual_norm, sample, stability_bound

__all__ = [
    "Ball2", "BilinearGame", "Box", "ConvexOFTPL", "CumulativeLossTable", "EmpiricalDistribution",
    "Grid", "GridGame", "Guess", "LossOracle", "NonconvexOFTPL", "Norm", "NormTag", "PerturbationSpec",
    "RngStream", "SaddleProblem", "Simplex", "comparator_convex", "comparator_grid", "contains",
    "default_params_cc", "default_params_ncnc", "diameter", "duality_gap", "enumerate_points",
    "expected_dual_norm", "gap_bound_cc", "linear_loss", "linear_minimize", "monotonicity_check",
    "pbr_oracle", "quadratic_loss", "regret_bound_convex", "sample", "sample_action", "solve_cc",
    "solve_ncnc", "stability_bound", "stability_probe", "wasserstein1",
]
