import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypdetect import analytics as A
from hypdetect import dynamics
from hypdetect.config import RadialBarrierSpec

# 200-bit mpmath oracles
G_ORACLE = [
    ((2.0, 1.0, 1.0, 3.0), 0.25686448984970005107),
    ((3.0, 0.75, 2.0, 4.0), 0.31596657342749611905),
    ((1.5, 0.5, 0.5, 2.5), 0.29209370901352614545),
    ((14.0, 0.75, 5.0, 15.0), 0.00061802309235740876698),
    ((9.0, 1.0, 6.0, 12.0), 0.04742577605784892),
]
EXIT_ORACLE = [
    ((1.0, 1.0, 0.5), 0.31455423310964801002),
    ((0.3, 2.0, 0.01), 0.0026997960632601903141),
    ((1.0, 2.0, 4.0), 0.87699398020932418419),
    ((0.05, 6.0, 0.001), 0.11384629800665803398),
    ((2.0, 3.0, 10.0), 0.83178935125524916044),
]
MEAN_ORACLE = [
    ((0.75, 4.0, 8.0), 57.24372257021024),
    ((1.0, 0.3, 5.0), 269.6859237571411),
    ((0.6, 2.0, 2.5), 0.28128326666374115),
]
DUFRESNE_ORACLE = [
    ((2.0, 0.75, 0.5), 0.73998003053025868584),
    ((0.3, 1.2, 1.0), 0.91173503960627801183),
    ((50.0, 0.75, 0.5), 0.095672207532944351650),
]

@st.composite
def barrier(draw):
    a = draw(st.floats(0.3, 2.0))
    y0 = draw(st.floats(0.05, 6.0))
    Y = y0 + draw(st.floats(0.05, 6.0))
    return RadialBarrierSpec(a, y0, Y)


@pytest.mark.parametrize("args,expected", G_ORACLE)
def test_G_oracle(args, expected):
    y, a, y0, Y = args
    assert A.hitting_prob_G(y, RadialBarrierSpec(a, y0, Y)) == pytest.approx(expected, rel=1e-11)


@pytest.mark.parametrize("args,expected", EXIT_ORACLE)
def test_exit_oracle(args, expected):
    assert A.bm_exit_prob(*args) == pytest.approx(expected, rel=1e-11)


@pytest.mark.parametrize("args,expected", MEAN_ORACLE)
def test_mean_time_oracle(args, expected):
    assert A.mean_hit_time_from_reflector(RadialBarrierSpec(*args)) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("args,expected", DUFRESNE_ORACLE)
def test_dufresne_oracle(args, expected):
    assert A.dufresne_tail(*args) == pytest.approx(expected, rel=1e-11)


def test_laplace_oracle():
    spec = RadialBarrierSpec(0.75, 5.0, 10.0)
    assert A.laplace_bound(0.5, 7.0, spec) == pytest.approx(0.055987742099323347073, rel=1e-11)


def test_epsilon_oracle():
    assert A.epsilon_kappa_s(2.0, 10.0, 0.75) == pytest.approx(0.33358128406595811901, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(barrier())
def test_G_endpoints_and_monotone(spec):
    assert A.hitting_prob_G(spec.y0, spec) == pytest.approx(1.0)
    assert A.hitting_prob_G(spec.Y, spec) == pytest.approx(0.0, abs=1e-12)
    ys = np.linspace(spec.y0, spec.Y, 9)
    g = [A.hitting_prob_G(y, spec) for y in ys]
    assert all(b <= a + 1e-12 for a, b in zip(g, g[1:]))
    mid = 0.5 * (spec.y0 + spec.Y)
    # a higher absorbing level is reached sooner
    lower = RadialBarrierSpec(spec.alpha, 0.9 * spec.y0, spec.Y)
    assert A.hitting_prob_G(mid, lower) <= A.hitting_prob_G(mid, spec) + 1e-12


@settings(max_examples=100, deadline=None)
@given(barrier())
def test_mean_time_below_bound(spec):
    exact = A.mean_hit_time_from_reflector(spec)
    b1, _ = A.mean_hit_time_bounds(spec)
    assert 0 <= exact <= b1 * (1 + 1e-12)


def test_mean_time_degenerate_gap():
    assert A.mean_hit_time_from_reflector(RadialBarrierSpec(0.75, 4.0, 4.0 + 1e-9)) < 1e-6


def test_laplace_bound_properties():
    spec = RadialBarrierSpec(0.75, 5.0, 10.0)
    assert A.laplace_bound(0.5, 5.0, spec) == pytest.approx(1.0)
    vals = [A.laplace_bound(0.5, y, spec) for y in np.linspace(5, 10, 30)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        A.laplace_bound(0.0, 6.0, spec)


def test_conditional_mean_bound_properties():
    spec = RadialBarrierSpec(0.75, 5.0, 10.0)
    assert A.conditional_mean_bound(5.0, spec) == 0.0
    vals = [A.conditional_mean_bound(y, spec) for y in np.linspace(5, 9.99, 30)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_normal_cdf():
    assert A.normal_cdf(0.0) == 0.5
    assert A.normal_cdf(-1.7) == pytest.approx(1 - A.normal_cdf(1.7), abs=1e-14)
    for k in (1.0, 2.0, 3.0):
        assert A.mills_lower(k) <= A.normal_cdf(-k)


def test_exit_prob_limits():
    assert A.bm_exit_prob(1.0, 2.0, 0.0) == 0.0
    assert A.bm_exit_prob(1.0, 2.0, 1e6) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        A.bm_exit_prob(1.0, 1.0, -1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 5.0), st.floats(0.01, 5.0), st.floats(1e-4, 50.0), st.floats(1.0, 2.0))
def test_exit_prob_monotone_and_symmetric(a, b, v, f):
    p = A.bm_exit_prob(a, b, v)
    assert 0.0 <= p <= 1.0
    assert A.bm_exit_prob(a, b, v * f) >= p - 1e-12
    assert A.bm_exit_prob(b, a, v) == pytest.approx(p, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 5.0), st.floats(1.0, 3.0), st.floats(1e-4, 50.0))
def test_exit_bracket(a, ratio, v):
    lo, hi = A.exit_bracket(a, v)
    p = A.bm_exit_prob(a, a * ratio, v)
    assert lo - 1e-12 <= p <= hi + 1e-12


def test_series_branches_agree():
    # both series evaluated on either side of the switch point
    a, b = 0.7, 1.3
    v = 0.5 * (a + b) ** 2
    assert A._exit_images(a, b, v) == pytest.approx(1 - A._stay_eigen(a, b, v), abs=1e-12)


def test_epsilon_kappa_s():
    assert A.epsilon_kappa_s(2.0, 0.0, 0.75) == 1.0
    assert A.epsilon_kappa_s(2.0, 1e8, 0.75) == pytest.approx(2**-1.5, rel=0.01)
    for s in np.geomspace(1e-3, 1e6, 40):
        for a in (0.55, 0.75, 1.0):
            assert 0 < A.epsilon_kappa_s(1.0, s, a) <= 1.0


def test_dufresne_limits():
    assert A.dufresne_tail(1e12, 0.75, 0.5) < 1e-6
    assert A.dufresne_tail(1e-12, 0.75, 0.5) == pytest.approx(1.0)
    x = A.dufresne_quantile_x(0.1, 0.75, 0.5)
    assert A.dufresne_tail(x, 0.75, 0.5) == pytest.approx(0.1, rel=1e-10)


def test_dufresne_tail_power_law():
    xs = np.geomspace(10, 1e3, 30)
    slope = np.polyfit(np.log(xs), np.log(A.dufresne_tail(xs, 0.75, 0.5)), 1)[0]
    assert slope == pytest.approx(-0.75, abs=0.05)


def test_truncation_slack_shrinks_with_horizon():
    s1 = A.dufresne_truncation_slack(0.75, 0.5, 50.0, 1e-3)
    s2 = A.dufresne_truncation_slack(0.75, 0.5, 200.0, 1e-3)
    assert 0 <= s2 < s1 <= 1


@pytest.mark.slow
def test_mc_mean_time_from_reflector():
    spec = RadialBarrierSpec(0.75, 4.0, 8.0)
    _, times = dynamics.passage_sample(8.0, spec, 10_000, 31, reflect_top=True, dt=1e-2)
    exact = A.mean_hit_time_from_reflector(spec)
    assert abs(times.mean() / exact - 1) <= 0.05


def test_mc_laplace_and_conditional_mean():
    spec = RadialBarrierSpec(0.75, 5.0, 10.0)
    paths = 4000
    _, t = dynamics.passage_sample(7.0, spec, paths, 32, reflect_top=True, dt=1e-2, t_max=80.0)
    lt = np.exp(-0.5 * t)
    assert lt.mean() <= A.laplace_bound(0.5, 7.0, spec) + 3 * lt.std() / math.sqrt(paths)
    codes, t = dynamics.passage_sample(7.0, spec, paths, 33, reflect_top=False, dt=1e-2)
    th = t[codes == 0]
    assert th.mean() <= A.conditional_mean_bound(7.0, spec) + 3 * th.std() / math.sqrt(th.size)
