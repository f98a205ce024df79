import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypdetect import heavytail as H
from hypdetect import rng as rngmod
from hypdetect.config import ParetoSpec


def test_sampler_endpoint():
    assert H.sample_pareto(ParetoSpec(3.0, 0.7), 1.0) == 3.0


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_sampler_tail(gamma):
    spec = ParetoSpec(2.0, gamma)
    n = 1_000_000
    z = H.sample_pareto(spec, rngmod.stream(1, rngmod.NS_PARETO, 99), n)
    p = 2.0**-gamma
    assert abs(np.mean(z >= 2 * spec.omega) - p) <= 3 * math.sqrt(p * (1 - p) / n)
    assert z.min() >= spec.omega


def test_sampler_mean_gamma_two():
    spec = ParetoSpec(1.5, 2.0)
    z = H.sample_pareto(spec, rngmod.stream(2, rngmod.NS_PARETO, 99), 1_000_000)
    # infinite variance: the error of the mean decays like sqrt(log n / n)
    assert z.mean() == pytest.approx(spec.mean, rel=0.02)
    assert spec.mean == pytest.approx(2 * spec.omega)


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 10.0), st.floats(0.2, 4.0), st.floats(1.0, 1e6))
def test_pareto_tail_formula(omega, gamma, x):
    spec = ParetoSpec(omega, gamma)
    assert H.pareto_tail(x, spec) == pytest.approx(min(1.0, (omega / x) ** gamma))
    u = H.pareto_tail(x, spec)
    if u < 1:
        assert H.sample_pareto(spec, u) == pytest.approx(x, rel=1e-9)


def test_spec_validation():
    with pytest.raises(ValueError):
        ParetoSpec(0.5, 1.0)
    with pytest.raises(ValueError):
        ParetoSpec(1.0, 0.0)


@pytest.mark.parametrize("gamma", [0.3, 0.5, 0.9])
def test_single_summand_bound(gamma):
    spec = ParetoSpec(1.0, gamma)
    calib = H.calibrate(spec)
    for L in (10.0, 100.0, 1e4):
        bound, x = H.sum_tail_bound(1, L, spec, calib)
        assert x == pytest.approx(L)
        assert bound == pytest.approx(min(1.0, calib.c * L**-gamma))
        assert bound >= H.pareto_tail(L, spec)


def test_precondition_names_L0():
    spec = ParetoSpec(1.0, 2.0)
    calib = H.calibrate(spec)
    assert calib.L0 > 10
    with pytest.raises(H.PreconditionError, match="L0"):
        H.sum_tail_bound(1000, 10.0, spec, calib)


def test_L_floor_raises_L0():
    spec = ParetoSpec(1.0, 1.0)
    assert H.calibrate(spec, L_floor=100.0).L0 == 100.0
    assert H.calibrate(spec).L0 < 100.0


def test_gamma_one_example():
    spec = ParetoSpec(1.0, 1.0)
    bound, x = H.sum_tail_bound(1000, 20.0, spec)
    est = H.sum_tail_mc(1000, x, spec, 100_000, 3)
    sigma = math.sqrt(max(est.estimate * (1 - est.estimate), 1e-5) / est.replicas)
    assert est.estimate <= bound + 3 * sigma


def test_mc_edge_cases():
    spec = ParetoSpec(2.0, 1.5)
    assert H.sum_tail_mc(10, 20.0, spec, 1000, 1).estimate == 1.0
    assert H.sum_tail_mc(10, math.inf, spec, 1000, 1).estimate == 0.0
    with pytest.raises(ValueError):
        H.sum_tail_mc(10, 100.0, spec, 999, 1)


def test_mc_generator_and_seed_paths_agree_statistically():
    spec = ParetoSpec(1.0, 0.5)
    a = H.sum_tail_mc(10, 1e4, spec, 200_000, np.random.default_rng(3))
    b = H.sum_tail_mc(10, 1e4, spec, 200_000, 3)
    assert a.ci[0] <= b.ci[1] and b.ci[0] <= a.ci[1]


def test_tail_slope_gamma_half():
    spec = ParetoSpec(1.0, 0.5)
    m = 100
    Ls = np.geomspace(1e2, 1e4, 9)
    s = H.partial_sums(spec, [m], 1_000_000, 6)[:, 0]
    est = [np.mean(s >= L * m * m) for L in Ls]
    slope = np.polyfit(np.log(Ls), np.log(est), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.1)


def test_single_max_heuristic():
    spec = ParetoSpec(1.0, 0.5)
    m = 100
    est = H.sum_tail_mc(m, 1e7, spec, 1_000_000, 5)
    ratio = est.estimate / (m * H.pareto_tail(1e7, spec))
    assert ratio == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_bounds_hold_small_run(gamma):
    spec = ParetoSpec(1.0, gamma)
    calib = H.calibrate(spec)
    Ls = [calib.L0 * 1.01, calib.L0 * 3, calib.L0 * 30]
    rows = H.tail_table(spec, [10, 100, 1000], Ls, 20_000, 11, calib)
    assert all(r["violation_sigmas"] <= 3.0 for r in rows)


def test_partial_sums_reproducible_and_consistent():
    spec = ParetoSpec(1.0, 1.0)
    a = H.partial_sums(spec, [10, 100], 25_000, 4)
    b = H.partial_sums(spec, [100, 10], 25_000, 4)
    assert np.array_equal(a, b)
    assert np.all(a[:, 1] >= a[:, 0] + 90 * spec.omega)


def test_log_threshold():
    assert H.log_threshold(100, 5.0, 0.5) == pytest.approx(math.log(5 * 100**2))
    assert H.log_threshold(100, 5.0, 1.0) == pytest.approx(math.log(5 * 100 * math.log(100)))
    assert H.log_threshold(100, 5.0, 2.0) == pytest.approx(math.log(500))
    with pytest.raises(ValueError):
        H.log_threshold(1, 5.0, 1.0)


def test_write_table(tmp_path):
    spec = ParetoSpec(1.0, 0.5)
    rows = H.tail_table(spec, [10], [100.0], 1000, 1)
    H.write_table(rows, tmp_path / "t.csv")
    head = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert head == "m,gamma,L,threshold,mc_estimate,ci_lo,ci_hi,bound"
