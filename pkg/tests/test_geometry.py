import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypdetect.config import ModelParams, PolarPoint
from hypdetect.geometry import (
    OutOfDomainError,
    distance,
    hyperbolic_distance,
    in_target_ball,
    phi,
    phi_asymptotic,
    phi_inverse,
    phi_raw,
    theta_R,
)

# 200-bit mpmath values of acosh(cosh r1 cosh r2 - sinh r1 sinh r2 cos(t1 - t2))
DISTANCE_ORACLE = [
    ((1.0, 0.0, 2.0, 1.0), 1.9255762292690651039),
    ((10.0, 0.1, 10.0, 0.100001), 0.011013177216751978568),
    ((15.0, 0.0, 15.0, 0.001), 14.798195746191793718),
    ((0.5, 0.0, 3.0, math.pi), 3.5),
    ((20.0, 0.0, 20.0, 2.0), 39.654792507461816646),
    ((0.0, 0.0, 7.0, 1.0), 7.0),
]

# 200-bit mpmath values of acos(coth R tanh(r/2))
PHI_ORACLE = [
    (1.0, 5.0, 1.09036792954903191),
    (9.0, 9.210340371976184, 0.022216179092968870677),
    (15.2, 15.201804919084164, 0.0010009026584347604388),
    (0.1, 10.0, 1.5208171469106435185),
    (30.0, 30.0, 6.118046410036038681e-7),
]

radius = st.floats(0.0, 40.0, allow_nan=False)
angle = st.floats(-math.pi, math.pi, allow_nan=False)


@pytest.mark.parametrize("args,expected", DISTANCE_ORACLE)
def test_distance_matches_high_precision(args, expected):
    assert distance(*args) == pytest.approx(expected, rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("r,R,expected", PHI_ORACLE)
def test_phi_matches_high_precision(r, R, expected):
    assert phi_raw(r, R) == pytest.approx(expected, rel=1e-12)


def test_phi_endpoints():
    p = ModelParams(n=100, nu=1.0, alpha=0.75, beta=0.5)
    assert phi(0.0, p) == pytest.approx(math.pi / 2)
    # the point (R, phi(R)) sits at distance exactly R from (R, 0)
    assert distance(p.R, float(phi(p.R, p)), p.R, 0.0) == pytest.approx(p.R, rel=1e-12)
    assert phi(p.R, p) == pytest.approx(phi_asymptotic(p.R), rel=1e-2)


def test_phi_rejects_out_of_domain():
    p = ModelParams(n=100, nu=1.0, alpha=0.75, beta=0.5)
    with pytest.raises(OutOfDomainError):
        phi(p.R + 1.0, p)
    with pytest.raises(OutOfDomainError):
        phi(-0.1, p)
    with pytest.raises(OutOfDomainError):
        phi_inverse(2.0, p)


@settings(max_examples=200, deadline=None)
@given(radius, radius, angle, angle)
def test_distance_symmetric_and_nonnegative(r1, r2, t1, t2):
    d12 = distance(r1, t1, r2, t2)
    assert d12 >= 0
    assert d12 == pytest.approx(distance(r2, t2, r1, t1), rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(radius, radius, radius, angle, angle, angle)
def test_triangle_inequality(r1, r2, r3, t1, t2, t3):
    d12 = distance(r1, t1, r2, t2)
    d23 = distance(r2, t2, r3, t3)
    d13 = distance(r1, t1, r3, t3)
    assert d13 <= d12 + d23 + 1e-9 * (1 + d12 + d23)


@settings(max_examples=100, deadline=None)
@given(radius, radius)
def test_radial_pair_distance_is_radius_difference(r1, r2):
    assert distance(r1, 0.3, r2, 0.3) == pytest.approx(abs(r1 - r2), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.5, 40.0), st.floats(0.0, 1.0))
def test_phi_inverse_round_trip(R, frac):
    p = ModelParams(n=math.exp(R / 2), nu=1.0, alpha=0.75, beta=0.5)
    r = frac * p.R
    t = float(phi(r, p))
    assert float(phi(phi_inverse(t, p), p)) == pytest.approx(t, rel=1e-9, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 30.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_phi_decreasing(R, a, b):
    lo, hi = sorted((a * R, b * R))
    assert phi_raw(hi, R) <= phi_raw(lo, R) + 1e-15


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0), angle)
def test_target_ball_matches_distance(frac, theta):
    p = ModelParams(n=100, nu=1.0, alpha=0.75, beta=0.5)
    r = frac * p.R
    d = distance(r, theta, p.R, 0.0)
    inside = in_target_ball(PolarPoint(r, theta), p)
    if abs(d - p.R) > 1e-9:
        assert inside == (d <= p.R)


def test_target_ball_is_closed():
    p = ModelParams(n=100, nu=1.0, alpha=0.75, beta=0.5)
    r = 5.0
    assert in_target_ball(PolarPoint(r, float(phi(r, p))), p)
    assert not in_target_ball(PolarPoint(r, float(phi(r, p)) * (1 + 1e-9)), p)


def test_theta_R_is_distance_R():
    R = 12.0
    for r1, r2 in [(6.0, 7.0), (12.0, 12.0), (11.0, 3.0)]:
        t = float(theta_R(r1, r2, R))
        assert distance(r1, 0.0, r2, t) == pytest.approx(R, rel=1e-10)


def test_vectorized_distance():
    r = np.linspace(0, 10, 5)
    d = distance(r, 0.0, r, 0.0)
    assert np.all(d == 0.0)
    assert hyperbolic_distance(PolarPoint(1.0, 0.0), PolarPoint(2.0, 1.0)) == pytest.approx(1.9255762292690651)


def test_distance_examples():
    assert hyperbolic_distance(PolarPoint(3, 0.5), PolarPoint(3, 0.5)) == pytest.approx(0.0, abs=1e-12)
    assert hyperbolic_distance(PolarPoint(2, 0), PolarPoint(5, 0)) == pytest.approx(3.0, abs=1e-12)
    # 200-bit oracle
    d = hyperbolic_distance(PolarPoint(4, 0), PolarPoint(4, math.pi / 3))
    assert d == pytest.approx(6.6157147106967115545, rel=1e-13)


def test_phi_examples():
    p = ModelParams(n=math.exp(5), nu=1.0, alpha=0.75, beta=0.5)
    assert p.R == pytest.approx(10.0)
    assert float(phi(p.R, p)) == pytest.approx(0.013475384176940816684, rel=1e-10)
    assert phi(3.0, p) > phi(7.0, p)
    assert phi_inverse(math.pi / 2, p) == pytest.approx(0.0, abs=1e-8)
    assert phi_inverse(float(phi(p.R, p)), p) == pytest.approx(p.R, abs=1e-8)
    assert phi_inverse(float(phi(4.2, p)), p) == pytest.approx(4.2, abs=1e-8)


def test_phi_asymptotic_examples():
    assert phi_asymptotic(2.0) == pytest.approx(2 * math.exp(-1))
    assert phi_asymptotic(0.0) == pytest.approx(2.0)
    assert abs(phi_raw(20.0, 30.0) / phi_asymptotic(20.0) - 1) < 0.01


def test_target_ball_examples():
    p = ModelParams(n=1e4, nu=1.0, alpha=0.75, beta=0.5)
    assert in_target_ball(PolarPoint(p.R, 0.0), p)
    assert not in_target_ball(PolarPoint(0.0, math.pi), p)
    r = p.R / 2
    t = float(phi(r, p))
    assert not in_target_ball(PolarPoint(r, t * (1 + 1e-3)), p)
    assert in_target_ball(PolarPoint(r, t * (1 - 1e-3)), p)


def test_target_ball_agrees_with_cosh_law_on_random_points():
    p = ModelParams(n=100, nu=1.0, alpha=0.75, beta=0.5)
    g = np.random.default_rng(1)
    r = g.uniform(0, p.R, 10_000)
    t = g.uniform(-math.pi, math.pi, 10_000)
    d = distance(r, t, p.R, 0.0)
    by_angle = np.abs(t) <= phi_raw(r, p.R)
    clear = np.abs(d - p.R) > 1e-9
    assert np.array_equal(by_angle[clear], (d <= p.R)[clear])


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(n=100, nu=1.0, alpha=0.5, beta=0.5)
    with pytest.raises(ValueError):
        ModelParams(n=1.0, nu=1.0, alpha=0.75, beta=0.5)
    p = ModelParams(n=100, nu=2.0, alpha=0.75, beta=0.5)
    p.check()
    assert p.R == pytest.approx(2 * math.log(50), rel=1e-15)
    assert PolarPoint(1.0, 3 * math.pi).theta == pytest.approx(math.pi)
    assert PolarPoint(1.0, -math.pi).theta == math.pi
