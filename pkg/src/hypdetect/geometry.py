"""Hyperbolic-plane primitives on the disk of radius R around the origin."""

from __future__ import annotations

import math

import numpy as np

from ._numerics import log_cosh, log_sinh
from .config import ModelParams, PolarPoint


class OutOfDomainError(ValueError):
    pass


def _log_sin_half_sq(dtheta):
    """log(sin^2(dtheta/2)); -inf when dtheta is a multiple of 2 pi."""
    with np.errstate(divide="ignore"):
        return 2.0 * np.log(np.abs(np.sin(np.asarray(dtheta, dtype=float) / 2.0)))


def distance(r1, t1, r2, t2):
    """Vectorized hyperbolic distance between (r1, t1) and (r2, t2).

    Uses sinh^2(d/2) = sinh^2((r1-r2)/2) + sinh r1 sinh r2 sin^2((t1-t2)/2),
    evaluated in logs so that radii in the hundreds do not overflow.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        term_r = 2.0 * log_sinh(np.abs(r1 - r2) / 2.0)
        term_t = log_sinh(r1) + log_sinh(r2) + _log_sin_half_sq(np.asarray(t1) - np.asarray(t2))
        log_q = np.logaddexp(term_r, term_t)
        half = 0.5 * log_q
        big = half > 20.0
        small_val = 2.0 * np.arcsinh(np.exp(np.where(big, 0.0, half)))
        hb = np.where(big, half, 30.0)
        big_val = 2.0 * (hb + np.log1p(np.sqrt(1.0 + np.exp(-2.0 * hb))))
        d = np.where(big, big_val, small_val)
        d = np.where(np.isneginf(log_q), 0.0, d)
    return d[()]


def hyperbolic_distance(p: PolarPoint, q: PolarPoint) -> float:
    return float(distance(p.r, p.theta, q.r, q.theta))


def _check_radius(r, params: ModelParams) -> None:
    arr = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > params.R * (1 + 1e-15)):
        raise OutOfDomainError(f"radius outside [0, R={params.R}]")


def phi_raw(r, R: float):
    """Critical angle without domain checks; see :func:`phi`.

    With x = coth R tanh(r/2), 1 - x = sinh(R - r/2) / (sinh R cosh(r/2)),
    and phi = 2 asin(sqrt((1 - x)/2)) avoids the arccos cancellation near r = R.
    """
    r = np.asarray(r, dtype=float)
    log_one_minus_x = log_sinh(R - r / 2.0) - log_sinh(R) - log_cosh(r / 2.0)
    val = 2.0 * np.arcsin(np.sqrt(np.minimum(np.exp(log_one_minus_x) / 2.0, 0.5)))
    return np.where(r == 0.0, math.pi / 2.0, val)[()]


def phi(r, params: ModelParams):
    """Largest angle at the origin keeping radius r within distance R of (R, 0)."""
    _check_radius(r, params)
    return phi_raw(np.minimum(r, params.R), params.R)


def phi_inverse_raw(t, R: float):
    """Closed-form inverse r = 2 atanh(tanh R cos t), written as
    r = log((2 - e)/e) with e = 1 - tanh R cos t = 2 sin^2(t/2) + cos t (1 - tanh R).
    """
    t = np.asarray(t, dtype=float)
    one_minus_tanh = 2.0 / (math.exp(2.0 * R) + 1.0) if R < 350 else 0.0
    e = 2.0 * np.sin(t / 2.0) ** 2 + np.cos(t) * one_minus_tanh
    with np.errstate(divide="ignore"):
        r = np.log(2.0 - e) - np.log(e)
    return np.clip(r, 0.0, R)[()]


def phi_inverse(t, params: ModelParams):
    """Radius whose critical angle equals t, for t in [phi(R), pi/2]."""
    t_arr = np.asarray(t, dtype=float)
    lo = float(phi_raw(params.R, params.R))
    tol = 1e-12
    if np.any(~np.isfinite(t_arr)) or np.any(t_arr < lo - tol) or np.any(t_arr > math.pi / 2 + tol):
        raise OutOfDomainError(f"angle outside [phi(R)={lo}, pi/2]")
    r = phi_inverse_raw(np.clip(t_arr, lo, math.pi / 2), params.R)
    return np.where(t_arr <= lo, params.R, r)[()]


def phi_asymptotic(r):
    """Large-radius approximation 2 exp(-r/2) of the critical angle."""
    return (2.0 * np.exp(-np.asarray(r, dtype=float) / 2.0))[()]


def in_target_ball_raw(r, theta, R: float):
    return np.abs(np.asarray(theta)) <= phi_raw(r, R)


def in_target_ball(p: PolarPoint, params: ModelParams) -> bool:
    """Closed-ball test d(p, (R, 0)) <= R, via |theta| <= phi(r)."""
    _check_radius(p.r, params)
    return bool(in_target_ball_raw(min(p.r, params.R), p.theta, params.R))


def theta_R(r1, r2, R: float):
    """Largest angle between radii r1, r2 (r1 + r2 >= R) at distance at most R.

    Solves cosh R = cosh r1 cosh r2 - sinh r1 sinh r2 cos(t); written through
    sin^2(t/2) = (sinh^2(R/2) - sinh^2((r1-r2)/2)) / (sinh r1 sinh r2).
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = 2.0 * log_sinh(R / 2.0)
        b = 2.0 * log_sinh(np.abs(r1 - r2) / 2.0)
        num = a + np.log1p(-np.exp(np.minimum(b - a, 0.0)))
        ratio = np.exp(num - log_sinh(r1) - log_sinh(r2))
    return (2.0 * np.arcsin(np.sqrt(np.clip(ratio, 0.0, 1.0))))[()]


__all__ = [
    "OutOfDomainError",
    "distance",
    "hyperbolic_distance",
    "in_target_ball",
    "in_target_ball_raw",
    "phi",
    "phi_asymptotic",
    "phi_inverse",
    "phi_inverse_raw",
    "phi_raw",
    "theta_R",
]
