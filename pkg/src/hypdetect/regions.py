"""Regions of starting points that detect the target by time s with
non-negligible probability: membership, defining radii and measure."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate, optimize

from ._numerics import log_sinh, neg_log_tanh_half, radial_cdf, stationary_density
from .analytics import epsilon_kappa_s, hitting_prob_G
from .config import ModelParams, MovementMode, PolarPoint, RadialBarrierSpec, Regime, RegionSpec
from .geometry import phi_inverse_raw, phi_raw

QUAD_LIMIT = 400
ALPHA_EQ_TOL = 1e-12


class QuadratureError(RuntimeError):
    """Adaptive quadrature missed its tolerance; carries the achieved error."""

    def __init__(self, achieved: float, tol: float):
        super().__init__(f"quadrature error {achieved:.3g} exceeds tolerance {tol:.3g}")
        self.achieved = achieved
        self.tol = tol


def _mixed_case(params: ModelParams) -> int:
    """-1, 0, +1 as alpha is below, equal to, or above 2 beta."""
    d = params.alpha - 2.0 * params.beta
    if abs(d) <= ALPHA_EQ_TOL * max(1.0, params.alpha):
        return 0
    return -1 if d < 0 else 1


def phi_s(mode: MovementMode | str, s: float, params: ModelParams, r0: float | None = None) -> float:
    """Angular scale of the regime at time s.

    angular: sqrt(s) e^{-beta r0}; radial: (s^{1/alpha} e^{-R})^{1/2}; mixed:
    (s^{1/alpha} e^{-R})^{min(beta, 1/2)} if alpha < 2 beta,
    e^{-beta R} sqrt(s log s) if alpha = 2 beta, e^{-beta R} sqrt(s) otherwise.
    """
    mode = MovementMode.parse(mode)
    if s < 0:
        raise ValueError("s must be non-negative")
    if s == 0:
        if mode is MovementMode.ANGULAR and r0 is None:
            raise ValueError("angular scale needs the starting radius r0")
        return 0.0
    a, b, R = params.alpha, params.beta, params.R
    if mode is MovementMode.ANGULAR:
        if r0 is None:
            raise ValueError("angular scale needs the starting radius r0")
        return math.sqrt(s) * math.exp(-b * r0)
    if mode is MovementMode.RADIAL:
        return math.exp(0.5 * (math.log(s) / a - R))
    case = _mixed_case(params)
    if case < 0:
        return math.exp(min(b, 0.5) * (math.log(s) / a - R))
    if case == 0:
        if s <= 1.0:
            raise ValueError("the alpha = 2 beta scale needs s > 1")
        return math.exp(-b * R) * math.sqrt(s * math.log(s))
    return math.exp(-b * R) * math.sqrt(s)


def half_perimeter(r, params: ModelParams):
    """(pi - phi(r)) sinh(beta r), half the length of the circle of radius r outside the target ball."""
    r = np.asarray(r, dtype=float)
    with np.errstate(over="ignore"):
        return ((math.pi - phi_raw(r, params.R)) * np.sinh(params.beta * r))[()]


def solve_r_hat(kappa: float, s: float, params: ModelParams) -> float:
    """Radius whose half perimeter outside the target ball equals kappa sqrt(s).

    Solved in logs by bracketed root-finding on the increasing map
    r -> log(pi - phi(r)) + log sinh(beta r).
    """
    target = kappa * math.sqrt(s)
    R = params.R
    if target < 0:
        raise ValueError("kappa sqrt(s) must be non-negative")
    if target == 0:
        return 0.0
    log_top = math.log(math.pi - float(phi_raw(R, R))) + float(log_sinh(params.beta * R))
    lt = math.log(target)
    if lt > log_top * (1 + 1e-12):
        raise ValueError(f"kappa sqrt(s) = {target:.6g} exceeds the half perimeter at R")
    if lt >= log_top:
        return R

    def f(r: float) -> float:
        return math.log(math.pi - float(phi_raw(r, R))) + float(log_sinh(params.beta * r)) - lt

    lo = 1e-300
    if f(lo) >= 0:
        return lo
    return float(optimize.brentq(f, lo, R, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))


def absorbing_radius(theta0, params: ModelParams):
    """Radius below which a point at angle |theta0| <= pi/2 lies in the target ball."""
    return phi_inverse_raw(np.minimum(np.abs(theta0), math.pi / 2), params.R)


def _g(r, alpha: float, R: float):
    """log(tanh(alpha R/2)/tanh(alpha r/2))."""
    return (neg_log_tanh_half(alpha * np.asarray(r, dtype=float)) - neg_log_tanh_half(alpha * R))[()]


def _g_inverse(c, alpha: float, R: float):
    """Radius r with _g(r) = c, for c >= 0."""
    t = np.asarray(c, dtype=float) + neg_log_tanh_half(alpha * R)
    with np.errstate(divide="ignore"):
        # alpha r = 2 atanh(e^{-t}) = log(1 + e^{-t}) - log(1 - e^{-t})
        ar = np.log1p(np.exp(-t)) - np.log(-np.expm1(-t))
    return np.minimum(ar / alpha, R)[()]


def solve_r_tilde0(theta0: float, kappa: float, s: float, params: ModelParams) -> float:
    """Radius r~ >= r_abs(theta0) where the hitting probability of r_abs before R is eps(kappa, s).

    The hitting probability is g(r)/g(r_abs) with g(r) = log(tanh(aR/2)/tanh(ar/2)),
    so r~ = g^{-1}(eps g(r_abs)) in closed form.
    """
    th = abs(theta0)
    if th > math.pi / 2:
        raise ValueError("no absorbing radius for |theta0| > pi/2")
    eps = epsilon_kappa_s(kappa, s, params.alpha)
    return float(r_tilde0_array(th, eps, params))


def r_tilde0_array(theta0, eps: float, params: ModelParams):
    a, R = params.alpha, params.R
    r_abs = absorbing_radius(theta0, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _g_inverse(eps * _g(np.maximum(r_abs, 1e-300), a, R), a, R)
    return np.where(r_abs >= R, R, np.maximum(out, r_abs))[()]


def check_spec(spec: RegionSpec) -> None:
    p = spec.params
    if spec.mode is MovementMode.ANGULAR:
        if spec.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if spec.kappa * math.sqrt(spec.s) > math.pi / 2 * math.exp(p.beta * p.R):
            raise ValueError("kappa sqrt(s) exceeds (pi/2) e^{beta R}")
    elif spec.mode is MovementMode.RADIAL:
        if spec.kappa < 1:
            raise ValueError("radial regions need kappa >= 1")
        if float(phi_raw(p.R, p.R)) + spec.kappa * phi_s(spec.mode, spec.s, p) > math.pi / 2:
            raise ValueError("phi(R) + kappa phi_s exceeds pi/2")
    elif spec.regime is Regime.LARGE_S and spec.kappa <= 1:
        raise ValueError("the large-s mixed region needs kappa_A > 1")


def sector_half_angle(spec: RegionSpec) -> float:
    """phi(R) + kappa phi_s, the half opening of the sector around the target (radial and large-s mixed)."""
    p = spec.params
    return float(phi_raw(p.R, p.R)) + spec.kappa * phi_s(spec.mode, spec.s, p)


def angular_width(r, spec: RegionSpec):
    """Largest |theta0| in the region at radius r, for the regimes whose
    predicate is an angular bound at each radius (angular and mixed)."""
    p = spec.params
    r = np.asarray(r, dtype=float)
    ph = phi_raw(r, p.R)
    if spec.mode is MovementMode.ANGULAR:
        w = ph + spec.kappa * np.sqrt(spec.s) * np.exp(-p.beta * r)
    elif spec.mode is MovementMode.MIXED and spec.regime is Regime.SMALL_S:
        w = ph + np.sqrt(spec.s) * np.exp(-p.beta * r)
    elif spec.mode is MovementMode.MIXED:
        w = np.maximum(sector_half_angle(spec), ph + spec.kappa_R * np.exp(-min(p.beta, 0.5) * r))
    else:
        raise ValueError("radial regions are not an angular bound per radius; use radial_theta_boundary")
    return np.minimum(w, math.pi)[()]


def membership_arrays(r, theta, spec: RegionSpec):
    """Vectorized membership for arrays of radii and angles."""
    check_spec(spec)
    p = spec.params
    r = np.asarray(r, dtype=float)
    th = np.abs(np.asarray(theta, dtype=float))
    if spec.mode is not MovementMode.RADIAL:
        return (th <= angular_width(r, spec))[()]
    eps = epsilon_kappa_s(spec.kappa, spec.s, p.alpha)
    half = th <= math.pi / 2
    rt = r_tilde0_array(np.minimum(th, math.pi / 2), eps, p)
    return (half & ((th <= sector_half_angle(spec)) | (r <= rt)))[()]


def membership(x0: PolarPoint, spec: RegionSpec) -> bool:
    return bool(membership_arrays(x0.r, x0.theta, spec))


@dataclass(frozen=True)
class DerivedRadii:
    r_hat: float = math.nan
    r_prime: float = math.nan
    r_double_prime: float = math.nan


def mixed_radii(spec: RegionSpec) -> DerivedRadii:
    """r' (the region covers every angle below it) and r'' (where the two
    angular bounds cross) of the large-s mixed region.

    r' is 0 when the full circle is never covered and r'' is R when the
    radius-dependent bound stays above the sector at every radius.
    """
    if spec.mode is not MovementMode.MIXED or spec.regime is not Regime.LARGE_S:
        raise ValueError("defined for the large-s mixed region only")
    p = spec.params
    b = min(p.beta, 0.5)
    kr = spec.kappa_R

    def bound(r: float) -> float:
        return float(phi_raw(r, p.R)) + kr * math.exp(-b * r)

    def root(level: float, lo: float) -> float:
        if bound(lo) <= level:
            return lo
        if bound(p.R) >= level:
            return p.R
        return float(optimize.brentq(lambda r: bound(r) - level, lo, p.R, xtol=1e-13, maxiter=200))

    r1 = root(math.pi, 0.0)
    r2 = root(sector_half_angle(spec), r1)
    return DerivedRadii(r_prime=r1, r_double_prime=r2)


def _quad(f, a: float, b: float, tol: float, points=None) -> tuple[float, float]:
    if b <= a:
        return 0.0, 0.0
    pts = None if points is None else sorted(x for x in points if a < x < b)
    val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=1e-10, limit=QUAD_LIMIT, points=pts or None)
    return val, err


def measure_mu_D(spec: RegionSpec, *, return_error: bool = False):
    """Expected number of configuration points in the region.

    Angular and mixed: (n/pi) int rho(r) min(pi, width(r)) dr, using the
    theta -> -theta symmetry and the uniform angular density. Radial:
    (n/pi) [theta_c + int_{theta_c}^{pi/2} F(r~(theta)) dtheta] with F the
    radial CDF. Absolute tolerance 1e-6 n.
    """
    check_spec(spec)
    p = spec.params
    tol = 1e-6 * p.n
    a, R = p.alpha, p.R
    if spec.mode is MovementMode.RADIAL:
        tc = min(sector_half_angle(spec), math.pi / 2)
        eps = epsilon_kappa_s(spec.kappa, spec.s, a)
        # the integrand is concentrated near theta_c ~ e^{-R/2}; integrate over log theta
        val, err = _quad(
            lambda u: float(radial_cdf(r_tilde0_array(math.exp(u), eps, p), a, R)) * math.exp(u),
            math.log(tc), math.log(math.pi / 2), tol * math.pi / p.n,
        )
        total = p.n / math.pi * (tc + val)
        err = p.n / math.pi * err
    else:
        breaks = [R - d for d in (1.0, 3.0, 10.0, 30.0) if d < R]
        if spec.mode is MovementMode.ANGULAR and spec.kappa * math.sqrt(spec.s) > 0:
            breaks.append(solve_r_hat(spec.kappa, spec.s, p))
        if spec.mode is MovementMode.MIXED and spec.regime is Regime.LARGE_S:
            d = mixed_radii(spec)
            breaks += [d.r_prime, d.r_double_prime]
        val, err = _quad(
            lambda r: float(stationary_density(r, a, R) * angular_width(r, spec)), 0.0, R, tol * math.pi / p.n, breaks
        )
        total = p.n / math.pi * val
        err = p.n / math.pi * err
    if not err <= tol:
        raise QuadratureError(err, tol)
    return (total, err) if return_error else total


def radial_theta_boundary(spec: RegionSpec, thetas) -> np.ndarray:
    """r~(theta) on a grid of angles in [theta_c, pi/2] (radial regime)."""
    eps = epsilon_kappa_s(spec.kappa, spec.s, spec.params.alpha)
    return np.asarray(r_tilde0_array(np.asarray(thetas, dtype=float), eps, spec.params))


def boundary_table(spec: RegionSpec, points: int = 400) -> np.ndarray:
    """Boundary of the region in the upper half plane as rows (r, theta_boundary).

    Angular and mixed regimes are sampled on a radius grid; the radial regime
    on an angle grid (the sector edge followed by the curve r~(theta)).
    """
    check_spec(spec)
    p = spec.params
    if spec.mode is MovementMode.RADIAL:
        tc = min(sector_half_angle(spec), math.pi / 2)
        th = np.linspace(tc, math.pi / 2, points)
        r_curve = radial_theta_boundary(spec, th)
        rows = [(p.R, tc), (float(r_curve[0]), tc)] + list(zip(r_curve.tolist(), th.tolist()))
        return np.asarray(rows)
    r = np.linspace(0.0, p.R, points)
    return np.column_stack([r, angular_width(r, spec)])


def write_boundary(spec: RegionSpec, path: "str | Path", points: int = 400) -> None:
    tab = boundary_table(spec, points)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "theta_boundary"])
        for r, t in tab:
            w.writerow([repr(float(r)), repr(float(t))])


def g_residual(theta0: float, kappa: float, s: float, params: ModelParams) -> float:
    """|G(r~) - eps| for the defining equation of r~ (self-check)."""
    r_abs = float(absorbing_radius(theta0, params))
    rt = solve_r_tilde0(theta0, kappa, s, params)
    if r_abs >= params.R:
        return 0.0
    spec = RadialBarrierSpec(alpha=params.alpha, y0=r_abs, Y=params.R)
    return abs(hitting_prob_G(rt, spec) - epsilon_kappa_s(kappa, s, params.alpha))


__all__ = [
    "DerivedRadii",
    "QuadratureError",
    "absorbing_radius",
    "angular_width",
    "boundary_table",
    "half_perimeter",
    "measure_mu_D",
    "membership",
    "membership_arrays",
    "mixed_radii",
    "phi_s",
    "radial_theta_boundary",
    "solve_r_hat",
    "solve_r_tilde0",
    "write_boundary",
]
