"""Closed-form quantities for the radial diffusion, Brownian exit times and the
exponential functional, used as oracles against simulation."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from ._numerics import log_cosh, log_sinh, log_tanh_ratio, neg_log_tanh_half
from .config import ModelParams, PolarPoint, RadialBarrierSpec
from .geometry import phi_raw

SERIES_TOL = 1e-14


def _check_bracket(y: float, spec: RadialBarrierSpec, *, open_top: bool = False) -> None:
    hi_ok = y < spec.Y if open_top else y <= spec.Y * (1 + 1e-15)
    if not (spec.y0 * (1 - 1e-15) <= y and hi_ok):
        raise ValueError(f"y={y} outside [{spec.y0}, {spec.Y}{')' if open_top else ']'}")


def hitting_prob_G(y: float, spec: RadialBarrierSpec) -> float:
    """Probability that the radial diffusion started at y reaches y0 before Y.

    Equal to log(tanh(aY/2)/tanh(ay/2)) / log(tanh(aY/2)/tanh(ay0/2)); both
    logs are differences of -log tanh(x/2), which stays accurate near Y.
    """
    _check_bracket(y, spec)
    a = spec.alpha
    y = min(max(y, spec.y0), spec.Y)
    num = log_tanh_ratio(a * y, a * spec.Y)
    den = log_tanh_ratio(a * spec.y0, a * spec.Y)
    if den <= 0.0:
        return 1.0 if y <= spec.y0 else 0.0
    return float(min(1.0, max(0.0, num / den)))


def mean_hit_time_from_reflector(spec: RadialBarrierSpec) -> float:
    """Exact mean time to reach y0 from the reflecting level Y.

    (2/a^2) [log(sinh(a y0)/sinh(a Y)) - cosh(a Y) log(tanh(a y0/2)/tanh(a Y/2))],
    with cosh(a Y) carried in logs.
    """
    a, y0, Y = spec.alpha, spec.y0, spec.Y
    first = float(log_sinh(a * y0) - log_sinh(a * Y))
    gap = float(log_tanh_ratio(a * y0, a * Y))
    if gap <= 0.0:
        return 0.0
    log_second = float(log_cosh(a * Y)) + math.log(gap)
    if log_second > 700.0:
        return math.inf
    return 2.0 / a**2 * (first + math.exp(log_second))


def mean_hit_time_bounds(spec: RadialBarrierSpec) -> tuple[float, float]:
    """Upper bounds (e^{aY}/a^2) log coth(a y0/2) and (4/a^2) e^{a(Y - y0)}.

    The second is only valid for y0 > log(2)/a and is nan otherwise.
    """
    a, y0, Y = spec.alpha, spec.y0, spec.Y
    b1 = math.exp(a * Y + math.log(float(neg_log_tanh_half(a * y0)))) / a**2
    b2 = 4.0 / a**2 * math.exp(a * (Y - y0)) if y0 > math.log(2.0) / a else math.nan
    return b1, b2


def _laplace_rates(lam: float, alpha: float) -> tuple[float, float]:
    root = math.sqrt(alpha**2 / 4.0 + 2.0 * lam)
    return root + alpha / 2.0, root - alpha / 2.0


def laplace_bound(lam: float, y: float, spec: RadialBarrierSpec) -> float:
    """Upper bound on E_y exp(-lam T_{y0}) for the diffusion reflected at Y."""
    if not lam > 0.0:
        raise ValueError("lambda must be positive")
    _check_bracket(y, spec)
    l1, l2 = _laplace_rates(lam, spec.alpha)

    def log_h(d: float) -> float:
        return float(np.logaddexp(math.log(l1) - l2 * d, math.log(l2) + l1 * d))

    return float(min(1.0, math.exp(log_h(spec.Y - y) - log_h(spec.Y - spec.y0))))


def conditional_mean_bound(y: float, spec: RadialBarrierSpec) -> float:
    """Bound (2/a)(y - y0) + (2/a^2)(1 - G(y)) on E_y(T_{y0} | T_{y0} < T_Y)."""
    _check_bracket(y, spec, open_top=True)
    a = spec.alpha
    return 2.0 / a * (y - spec.y0) + 2.0 / a**2 * (1.0 - hitting_prob_G(y, spec))


def normal_cdf(x):
    return special.ndtr(x)[()] if np.ndim(x) else float(special.ndtr(x))


def normal_sf(x):
    return float(special.ndtr(-x))


def mills_lower(kappa: float) -> float:
    """kappa/(sqrt(2 pi)(kappa^2 + 1)) e^{-kappa^2/2}, a lower bound on Phi(-kappa)."""
    return kappa / (math.sqrt(2.0 * math.pi) * (kappa**2 + 1.0)) * math.exp(-(kappa**2) / 2.0)


def _mass(lo: float, hi: float) -> float:
    """Standard normal mass of (lo, hi), using the tail on the far side."""
    if lo >= 0.0:
        return normal_sf(lo) - normal_sf(hi)
    if hi <= 0.0:
        return normal_sf(-hi) - normal_sf(-lo)
    return 1.0 - normal_sf(-lo) - normal_sf(hi)


def _exit_images(a: float, b: float, v: float) -> float:
    sq = math.sqrt(v)
    w = a + b
    total = normal_sf(a / sq) + normal_sf(b / sq)
    total += _mass(b / sq, (2 * b + a) / sq)
    k = 1
    while True:
        term = 0.0
        for kk in (k, -k):
            term -= _mass((-a + 2 * kk * w) / sq, (b + 2 * kk * w) / sq)
            term += _mass((b + 2 * kk * w) / sq, (2 * b + a + 2 * kk * w) / sq)
        total += term
        if abs(term) < SERIES_TOL and 2 * k * w > 8 * sq:
            break
        k += 1
    return total


def _stay_eigen(a: float, b: float, v: float) -> float:
    w = a + b
    total = 0.0
    n = 1
    while True:
        decay = math.exp(-(n * math.pi) ** 2 * v / (2.0 * w * w))
        term = 4.0 / (n * math.pi) * math.sin(n * math.pi * a / w) * decay
        total += term
        if 4.0 / (n * math.pi) * decay < SERIES_TOL:
            break
        n += 2
    return total


def bm_exit_prob(a: float, b: float, v: float) -> float:
    """P(standard Brownian motion from 0 leaves (-a, b) by time v).

    Image-charge series for small v / (a+b)^2, the odd-mode eigen series of
    the survival probability otherwise; both truncated at 1e-14.
    """
    if v < 0.0:
        raise ValueError("variance time must be non-negative")
    if a <= 0.0 or b <= 0.0:
        return 1.0
    if v == 0.0:
        return 0.0
    if not math.isfinite(v):
        return 1.0
    w = a + b
    if v / (w * w) > 0.5:
        p = 1.0 - _stay_eigen(a, b, v)
    else:
        p = _exit_images(a, b, v)
    return float(min(1.0, max(0.0, p)))


def exit_bracket(a: float, v: float) -> tuple[float, float]:
    """Lower and upper brackets Phi(-a/sqrt v) and 4 Phi(-a/sqrt v) of the exit
    probability from (-a, b) when a <= b."""
    lo = normal_sf(a / math.sqrt(v)) if v > 0 else 0.0
    return lo, 4.0 * lo


def angular_detection_prob(x0: PolarPoint, params: ModelParams, s: float) -> float:
    """Exact detection probability by time s for a particle that only moves in angle.

    The angle is a Brownian motion run at clock s cosech^2(beta r0); detection
    is its exit from (-(phi(r0) - |theta0|), 2 pi - phi(r0) - |theta0|).
    """
    p = float(phi_raw(x0.r, params.R))
    th = abs(x0.theta)
    if th <= p:
        return 1.0
    if x0.r == 0.0:
        raise ValueError("angular motion is undefined at the origin")
    log_var = math.log(s) - 2.0 * float(log_sinh(params.beta * x0.r)) if s > 0 else -math.inf
    v = math.exp(log_var) if log_var < 700 else math.inf
    return bm_exit_prob(th - p, 2.0 * math.pi - p - th, v)


def epsilon_kappa_s(kappa: float, s: float, alpha: float) -> float:
    """(1 + s) / (1 + kappa s^{1/(2 alpha)})^{2 alpha}, evaluated in logs."""
    if kappa < 1.0 or s < 0.0:
        raise ValueError("need kappa >= 1 and s >= 0")
    if s == 0.0:
        return 1.0
    log_den = 2.0 * alpha * float(np.logaddexp(0.0, math.log(kappa) + math.log(s) / (2.0 * alpha)))
    return float(min(1.0, math.exp(math.log1p(s) - log_den)))


def dufresne_shape_scale(alpha: float, beta: float) -> tuple[float, float]:
    """Shape and scale of the inverse-gamma law of the exponential functional."""
    return alpha / (2.0 * beta), 1.0 / (2.0 * beta**2)


def dufresne_tail(x, alpha: float, beta: float):
    """P(W >= x) for W = int_0^inf exp(-2 beta X_u) du, X a Brownian motion with drift alpha/2."""
    k, scale = dufresne_shape_scale(alpha, beta)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        out = special.gammainc(k, scale / x)
    return np.where(x <= 0.0, 1.0, out)[()]


def dufresne_quantile_x(p_tail: float, alpha: float, beta: float) -> float:
    """The x with P(W >= x) = p_tail."""
    k, scale = dufresne_shape_scale(alpha, beta)
    return float(scale / special.gammaincinv(k, p_tail))


def dufresne_truncation_slack(alpha: float, beta: float, horizon: float, delta: float) -> float:
    """P(int_h^inf exp(-2 beta X_u) du >= delta) for truncation at h = horizon.

    By the Markov property at h the remainder is exp(-2 beta X_h) W' with W'
    an independent copy of the full functional and X_h ~ N(alpha h/2, h), so
    the slack is E[P(W' >= delta exp(2 beta X_h))], integrated over X_h.
    """
    if delta <= 0:
        return 1.0
    mu, sd = 0.5 * alpha * horizon, math.sqrt(horizon)

    def f(z):
        return float(dufresne_tail(delta * math.exp(min(700.0, 2.0 * beta * (mu + sd * z))), alpha, beta)) * math.exp(
            -0.5 * z * z
        )

    val, _ = integrate.quad(f, -40.0, 40.0, points=[-mu / sd], limit=400, epsabs=1e-300)
    return min(1.0, val / math.sqrt(2.0 * math.pi))


__all__ = [
    "angular_detection_prob",
    "bm_exit_prob",
    "conditional_mean_bound",
    "dufresne_quantile_x",
    "dufresne_shape_scale",
    "dufresne_tail",
    "dufresne_truncation_slack",
    "epsilon_kappa_s",
    "exit_bracket",
    "hitting_prob_G",
    "laplace_bound",
    "mean_hit_time_bounds",
    "mean_hit_time_from_reflector",
    "mills_lower",
    "normal_cdf",
]
