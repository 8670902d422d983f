import math
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from oftpl.domains import Ball2, Box, Norm
from oftpl.perturbations import (NoStabilityBoundError, PerturbationSpec, RngStream, expected_dual_norm, from_record,
                                 harmonic, sample, stability_bound)


def test_ball_support():
    spec = PerturbationSpec.uniform_ball2(1.0, 2)
    s = sample(spec, RngStream(0, (0,)), size=20_000)
    assert np.sqrt((s * s).sum(axis=1)).max() <= 1.5


def test_exp_support():
    s = sample(PerturbationSpec.exp_coordinate(2.0, 3), RngStream(1, ("a",)), size=10_000)
    assert np.all(s > 0)


def test_ball_mean_norm_is_eta():
    s = sample(PerturbationSpec.uniform_ball2(1.0, 5), RngStream(2, ()), size=100_000)
    assert np.sqrt((s * s).sum(axis=1)).mean() == pytest.approx(1.0, rel=0.01)


def test_single_draw_is_first_row():
    spec = PerturbationSpec.gaussian_iso(1.0, 3)
    st = RngStream(9, (1, 2, "play"))
    np.testing.assert_array_equal(sample(spec, st), sample(spec, st, size=4)[0])


def test_expected_dual_norm_examples():
    assert expected_dual_norm(PerturbationSpec.uniform_ball2(3.0, 7)) == 3.0
    assert expected_dual_norm(PerturbationSpec.exp_coordinate(1.0, 1)) == 1.0
    assert expected_dual_norm(PerturbationSpec.exp_coordinate(1.0, 4)) == pytest.approx(25 / 12)


def test_exp_harmonic_matches_monte_carlo():
    # independent oracle: plain numpy exponentials, not the library sampler
    draws = np.random.default_rng(123).exponential(1.0, (1_000_000, 4)).max(axis=1)
    assert draws.mean() == pytest.approx(25 / 12, rel=0.005)


@pytest.mark.parametrize("family,norm", [("uniform_ball2", Norm.L2), ("exp_coordinate", Norm.LINF),
                                         ("gaussian_iso", Norm.L2)])
@pytest.mark.parametrize("d", [1, 3, 6])
def test_mean_dual_norm_within_three_se(family, norm, d):
    spec = PerturbationSpec(family, 2.0, d)
    n = norm(sample(spec, RngStream(d, (family,)), size=100_000))
    se = n.std(ddof=1) / math.sqrt(len(n))
    assert abs(n.mean() - expected_dual_norm(spec)) <= 3 * se


def test_ball_rotational_symmetry():
    s = sample(PerturbationSpec.uniform_ball2(1.0, 3), RngStream(5, ()), size=100_000)
    se = s.std(axis=0, ddof=1) / math.sqrt(len(s))
    assert np.linalg.norm(s.mean(axis=0)) <= 3 * np.linalg.norm(se)


def test_ball_radius_law():
    # ||sigma|| / radius should be Beta(d, 1): P(R <= r) = r^d
    d = 4
    spec = PerturbationSpec.uniform_ball2(1.0, d)
    r = np.sqrt((sample(spec, RngStream(6, ()), size=50_000) ** 2).sum(axis=1)) / spec.radius
    assert stats.kstest(r, stats.beta(d, 1).cdf).pvalue > 1e-3


def test_same_lane_same_draws_across_processes():
    code = ("import numpy as np;from oftpl.perturbations import *;"
            "s=sample(PerturbationSpec.exp_coordinate(1.5,3),RngStream(42,(1,7,'tilde')),size=5);"
            "print(s.tobytes().hex())")
    outs = {subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout
            for _ in range(2)}
    here = sample(PerturbationSpec.exp_coordinate(1.5, 3), RngStream(42, (1, 7, "tilde")), size=5)
    assert outs == {here.tobytes().hex() + "\n"}


def test_distinct_lanes_independent():
    spec = PerturbationSpec.gaussian_iso(1.0, 1)
    a = sample(spec, RngStream(0, (0, 1, "play")), size=20_000)[:, 0]
    b = sample(spec, RngStream(0, (0, 1, "tilde")), size=20_000)[:, 0]
    c = sample(spec, RngStream(0, (1, 1, "play")), size=20_000)[:, 0]
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.03
    assert abs(np.corrcoef(a, c)[0, 1]) < 0.03
    assert not np.array_equal(a, b)


def test_stability_bound_examples():
    assert stability_bound(PerturbationSpec.uniform_ball2(1.0, 2), Ball2.unit(2)) == 4.0
    box = Box(np.zeros(2), np.ones(2))
    assert stability_bound(PerturbationSpec.exp_coordinate(10.0, 2), box) == pytest.approx(100.0)
    assert stability_bound(PerturbationSpec.uniform_ball2(1e12, 2), Ball2.unit(2)) < 1e-11
    with pytest.raises(NoStabilityBoundError):
        stability_bound(PerturbationSpec.gaussian_iso(1.0, 2), Ball2.unit(2))
    with pytest.raises(ValueError):
        stability_bound(PerturbationSpec.uniform_ball2(1.0, 3), Ball2.unit(2))


def test_spec_validation_and_records():
    with pytest.raises(ValueError):
        PerturbationSpec.uniform_ball2(0.0, 2)
    with pytest.raises(ValueError):
        PerturbationSpec.exp_coordinate(1.0, 0)
    spec = from_record({"type": "uniform_ball2", "eta": 6.0}, dim=3)
    assert spec.eta == 6.0 and spec.radius == pytest.approx(8.0)
    assert from_record({"type": "exp_coordinate"}, dim=2, eta=3.0).eta == 3.0
    assert harmonic(3) == pytest.approx(1 + 1 / 2 + 1 / 3)
