"""Log-domain hyperbolic kernels shared by the formula modules.

Every rearrangement that guards against overflow of cosh/sinh at large
arguments, or against cancellation of nearly equal logarithms, lives here.
"""

from __future__ import annotations

import math

import numpy as np

LOG2 = math.log(2.0)


def log_sinh(x):
    """log(sinh x) for x >= 0; -inf at 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        small = x < 1.0
        out = np.where(small, np.log(np.sinh(np.where(small, x, 1.0))), 0.0)
        big = x + np.log1p(-np.exp(-2.0 * np.where(small, 1.0, x))) - LOG2
    return np.where(small, out, big)[()]


def log_cosh(x):
    x = np.abs(np.asarray(x, dtype=float))
    return (x + np.log1p(np.exp(-2.0 * x)) - LOG2)[()]


def log_cosh_minus_one(x):
    """log(cosh x - 1) = log(2 sinh^2(x/2))."""
    return (LOG2 + 2.0 * log_sinh(np.abs(np.asarray(x, dtype=float)) / 2.0))[()]


def neg_log_tanh_half(x):
    """-log(tanh(x/2)) = log(coth(x/2)) for x > 0, accurate at both ends."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        small = x < 1.0
        lo = -np.log(np.tanh(np.where(small, x, 1.0) / 2.0))
        hi = 2.0 * np.arctanh(np.exp(-np.where(small, 1.0, x)))
    return np.where(small, lo, hi)[()]


def log_tanh_ratio(a, b):
    """log(tanh(b/2) / tanh(a/2)) for 0 < a <= b (non-negative)."""
    return (neg_log_tanh_half(a) - neg_log_tanh_half(b))[()]


def coth(x):
    x = np.asarray(x, dtype=float)
    return (1.0 / np.tanh(x))[()]


def cosech(x):
    """1/sinh(x), zero once sinh overflows."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return (1.0 / np.sinh(x))[()]


def log_radial_cdf(r, alpha: float, R: float):
    """log of (cosh(alpha r) - 1)/(cosh(alpha R) - 1)."""
    return (log_cosh_minus_one(alpha * np.asarray(r, dtype=float)) - log_cosh_minus_one(alpha * R))[()]


def radial_cdf(r, alpha: float, R: float):
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(r <= 0.0, 0.0, np.exp(log_radial_cdf(np.maximum(r, 0.0), alpha, R)))[()]


def radial_inverse_cdf(u, alpha: float, R: float):
    """Invert (cosh(alpha r) - 1)/(cosh(alpha R) - 1) = u for u in [0, 1].

    With c = cosh(alpha r) - 1 = u (cosh(alpha R) - 1) we use
    alpha r = 2 asinh(sqrt(c / 2)) and evaluate sqrt(c/2) in logs.
    """
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        log_half_c = np.log(u) + log_cosh_minus_one(alpha * R) - LOG2
        half_log = 0.5 * log_half_c
        # asinh(e^h) = h + log(1 + sqrt(1 + e^{-2h})) for large h
        big = half_log > 20.0
        h_small = np.where(big, 0.0, half_log)
        h_big = np.where(big, half_log, 30.0)
        val = np.where(
            big,
            h_big + np.log1p(np.sqrt(1.0 + np.exp(-2.0 * h_big))),
            np.arcsinh(np.exp(h_small)),
        )
    r = 2.0 * val / alpha
    r = np.where(u >= 1.0, R, np.where(u <= 0.0, 0.0, np.minimum(r, R)))
    return r[()]


def stationary_density(r, alpha: float, R: float):
    """alpha sinh(alpha r)/(cosh(alpha R) - 1), the radial marginal density."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return np.exp(math.log(alpha) + log_sinh(alpha * r) - log_cosh_minus_one(alpha * R))[()]
