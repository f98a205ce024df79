"""Experiment orchestration: per-point detection estimates, the aggregate tail
P(T_det >= s) = exp(-int P_x0(T_det <= s) dmu(x0)), and exponent fits.

The aggregate integral uses rotation invariance. A path started at radius r
with angular displacement W_t is inside the target ball at time t iff its
start angle theta0 lies in [-W_t - phi(r_t), -W_t + phi(r_t)] modulo 2 pi.
The union over t <= s of these moving intervals is the arc
[-max(W + phi), max(phi - W)], so one path gives the detection indicator for
every theta0 at once and the angular integral is exact. Only the radial
integral is a quadrature over start-radius nodes.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from . import dynamics
from . import rng as rngmod
from ._numerics import radial_cdf, stationary_density
from .config import (
    ExponentFit,
    ModelParams,
    MovementMode,
    PolarPoint,
    RegionSpec,
    SimConfig,
    TailCurve,
    TailEntry,
)
from .geometry import phi_raw
from .heavytail import wilson_interval
from .regions import angular_width
from .sampling import sample_configuration

TWO_PI = 2.0 * math.pi
Z95 = 1.959963984540054
MODELS = ("sqrt_s", "s_pow_beta_over_alpha", "sqrt_s_log_s", "s_pow_1_over_2alpha")


def estimate_point_detection(
    x0: PolarPoint,
    params: ModelParams,
    mode: MovementMode | str,
    s: float,
    trajectories: int,
    cfg: SimConfig,
    seed: int,
    *,
    tag: int = 0,
) -> tuple[float, tuple[float, float]]:
    """Fraction of trajectories from x0 that detect the target by time s, with a Wilson 95% interval.

    Trajectory j uses stream (seed, trajectory namespace, tag, j).
    """
    if trajectories < 100:
        raise ValueError("use at least 100 trajectories")
    run = dataclasses.replace(cfg, horizon=s)
    hits = 0
    for j in range(trajectories):
        out = dynamics.simulate_detection(x0, params, mode, run, rngmod.stream(seed, rngmod.NS_TRAJECTORY, tag, j))
        hits += out.hit
    return hits / trajectories, wilson_interval(hits, trajectories)


@dataclass(frozen=True)
class QuadratureGrid:
    """Start-radius nodes at geometric distances from R, plus the angular rule.

    ``theta_method`` "exact" integrates the detected arc length; "grid" uses
    ``n_theta`` uniform angles in [0, pi] (midpoints), mirrored.
    """

    n_r: int = 48
    n_theta: int = 64
    theta_method: str = "exact"
    d_min: float = 1e-2
    r_min: float = 1e-2

    def radii(self, R: float) -> np.ndarray:
        if self.n_r < 3:
            raise ValueError("need at least 3 radial nodes")
        d = np.concatenate(([0.0], np.geomspace(self.d_min, R - self.r_min, self.n_r - 1)))
        return np.sort(R - d)

    def as_dict(self) -> dict:
        return dict(n_r=self.n_r, n_theta=self.n_theta, theta_method=self.theta_method,
                    d_min=self.d_min, r_min=self.r_min)


_GL = np.polynomial.legendre.leggauss(16)


def _cell_rule(r: np.ndarray, params: ModelParams):
    """Gauss points per cell: (t in [0, 1], rho-weighted weights), shape (cells, points)."""
    xg, wg = _GL
    lo, hi = r[:-1, None], r[1:, None]
    x = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
    w = stationary_density(x, params.alpha, params.R) * 0.5 * (hi - lo) * wg
    return (x - lo) / (hi - lo), w


def _hat_weights(r: np.ndarray, params: ModelParams) -> np.ndarray:
    """int rho(x) hat_k(x) dx for piecewise-linear interpolation on nodes r.

    The first node also takes the mass below it.
    """
    t, w = _cell_rule(r, params)
    out = np.zeros(r.size)
    out[:-1] += np.sum(w * (1 - t), axis=1)
    out[1:] += np.sum(w * t, axis=1)
    out[0] += float(radial_cdf(r[0], params.alpha, params.R))
    return out


def _loglinear_integral(r: np.ndarray, q: np.ndarray, params: ModelParams) -> np.ndarray:
    """int rho q dr with log q interpolated linearly between nodes (q has shape (nodes, S)).

    The fraction decays roughly exponentially in r, which log-linear
    interpolation captures on a coarse geometric grid.
    """
    t, w = _cell_rule(r, params)
    lq = np.log(np.maximum(q, 1e-300))
    vals = np.exp(lq[:-1, None, :] * (1 - t[..., None]) + lq[1:, None, :] * t[..., None])
    return np.einsum("cp,cps->s", w, vals) + float(radial_cdf(r[0], params.alpha, params.R)) * q[0]


def _arc_in_window(up: np.ndarray, dn: np.ndarray, width) -> np.ndarray:
    """Length of the arc [-up, dn] (mod 2 pi) inside [-width, width]."""
    full = (up + dn) >= TWO_PI
    width = np.broadcast_to(np.asarray(width, dtype=float), up.shape)
    tot = np.zeros_like(up)
    for k in (-1, 0, 1):
        lo = np.maximum(-up, -width + TWO_PI * k)
        hi = np.minimum(dn, width + TWO_PI * k)
        tot += np.maximum(0.0, hi - lo)
    return np.where(full, 2.0 * width, np.minimum(tot, 2.0 * width))


def _arc_on_grid(up: np.ndarray, dn: np.ndarray, n_theta: int) -> np.ndarray:
    """Fraction of uniform midpoint angles in (-pi, pi] covered by the arc, times 2 pi."""
    th = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    th = np.concatenate((-th[::-1], th))
    lo = -up[..., None]
    hi = dn[..., None]
    cov = np.zeros(up.shape + (th.size,), dtype=bool)
    for k in (-1, 0, 1):
        t = th + TWO_PI * k
        cov |= (t >= lo) & (t <= hi)
    return cov.mean(axis=-1) * TWO_PI


@dataclass
class NodeEnvelopes:
    """Detected-arc extremes per start-radius node: up[k], dn[k] of shape (paths, len(s))."""

    radii: np.ndarray
    s_values: np.ndarray
    up: list
    dn: list
    mode: MovementMode
    params: ModelParams
    paths: int


def node_envelopes(
    params: ModelParams,
    mode: MovementMode | str,
    s_values,
    grid: QuadratureGrid,
    paths_per_node: int,
    cfg: SimConfig,
    seed: int,
) -> NodeEnvelopes:
    """Simulate ``paths_per_node`` paths from every node, recording the arc at each s.

    Node k, path j uses the stream pair keyed by (seed, node namespace, k, j).
    """
    mode = MovementMode.parse(mode)
    s_values = np.asarray(s_values, dtype=float)
    radii = grid.radii(params.R)
    ups, dns = [], []
    for k, r in enumerate(radii):
        if s_values[-1] == 0.0:
            p = float(phi_raw(r, params.R))
            ups.append(np.full((paths_per_node, s_values.size), p))
            dns.append(np.full((paths_per_node, s_values.size), p))
            continue
        up, dn = dynamics.envelope_ensemble(r, params, mode, s_values, paths_per_node, cfg, seed, tag=k)
        ups.append(up)
        dns.append(dn)
    return NodeEnvelopes(radii, s_values, ups, dns, mode, params, paths_per_node)


@dataclass(frozen=True)
class AggregateResult:
    s: float
    p: float
    I_hat: float
    mc_se: float
    quad_err: float
    ci: tuple[float, float]
    flagged: bool
    n_effective: int

    @property
    def total_err(self) -> float:
        return math.hypot(self.mc_se, self.quad_err)


def _node_fractions(env: NodeEnvelopes, grid: QuadratureGrid, region: RegionSpec | None):
    """Per node: mean and variance over paths of the detected fraction of start angles."""
    means, variances = [], []
    for k, r in enumerate(env.radii):
        up, dn = env.up[k], env.dn[k]
        if region is not None:
            arc = _arc_in_window(up, dn, float(angular_width(r, region)))
        elif grid.theta_method == "grid":
            arc = _arc_on_grid(up, dn, grid.n_theta)
        else:
            arc = np.minimum(up + dn, TWO_PI)
        frac = arc / TWO_PI
        means.append(frac.mean(axis=0))
        variances.append(frac.var(axis=0, ddof=1) if frac.shape[0] > 1 else np.zeros(frac.shape[1]))
    return np.array(means), np.array(variances)


def aggregate_from_envelopes(
    env: NodeEnvelopes,
    grid: QuadratureGrid,
    *,
    region: RegionSpec | None = None,
    max_rel_err: float = 0.05,
) -> list[AggregateResult]:
    """exp(-I) per s, with I = n int rho(r) q(r) dr by log-linear product quadrature.

    The quadrature error is the difference to the same rule on every other
    node; the Monte Carlo error propagates the per-node sample variances
    through the linear-interpolation weights.
    With ``region`` only start points inside it contribute.
    """
    p = env.params
    q, var = _node_fractions(env, grid, region)
    I_fine = p.n * _loglinear_integral(env.radii, q, p)
    w = p.n * _hat_weights(env.radii, p)
    mc_se = np.sqrt((w**2) @ (var / env.paths))
    idx = np.unique(np.concatenate((np.arange(0, env.radii.size, 2), [env.radii.size - 1])))
    I_coarse = p.n * _loglinear_integral(env.radii[idx], q[idx], p)
    quad_err = np.abs(I_fine - I_coarse)
    out = []
    for i, s in enumerate(env.s_values):
        tot = math.hypot(mc_se[i], quad_err[i])
        I = float(I_fine[i])
        ci = (math.exp(-(I + Z95 * tot)), math.exp(-max(0.0, I - Z95 * tot)))
        out.append(
            AggregateResult(
                s=float(s), p=math.exp(-I), I_hat=I, mc_se=float(mc_se[i]), quad_err=float(quad_err[i]),
                ci=ci, flagged=bool(tot > max_rel_err * max(I, 1e-300)), n_effective=env.paths * env.radii.size,
            )
        )
    return out


def aggregate_tail(
    s: float,
    params: ModelParams,
    mode: MovementMode | str,
    grid: QuadratureGrid,
    trajectories_per_node: int,
    seed: int,
    cfg: SimConfig | None = None,
) -> AggregateResult:
    """P(T_det >= s) from the thinned-Poisson identity; see :func:`aggregate_from_envelopes`."""
    cfg = cfg or SimConfig(horizon=max(s, 1e-3))
    env = node_envelopes(params, mode, [s], grid, trajectories_per_node, cfg, seed)
    return aggregate_from_envelopes(env, grid)[0]


def tail_curve(
    params: ModelParams,
    mode: MovementMode | str,
    s_values,
    grid: QuadratureGrid,
    trajectories_per_node: int,
    seed: int,
    cfg: SimConfig | None = None,
) -> tuple[TailCurve, list[AggregateResult]]:
    """Aggregate tail at every s from a single set of paths (checkpoints)."""
    s_values = sorted(float(s) for s in s_values)
    if any(b <= a for a, b in zip(s_values, s_values[1:])):
        raise ValueError("s values must be distinct")
    cfg = cfg or SimConfig(horizon=max(s_values[-1], 1e-3))
    env = node_envelopes(params, mode, s_values, grid, trajectories_per_node, cfg, seed)
    res = aggregate_from_envelopes(env, grid)
    entries = [TailEntry(r.s, r.p, r.ci, r.n_effective) for r in res]
    return TailCurve(entries, MovementMode.parse(mode), params, grid.as_dict()), res


TAIL_HEADER = ["s", "p_hat", "ci_lo", "ci_hi", "n_effective", "I_hat", "mc_se", "quad_err", "flagged"]


def tail_rows(results: list[AggregateResult]) -> list[list]:
    return [
        [r.s, r.p, r.ci[0], r.ci[1], r.n_effective, r.I_hat, r.mc_se, r.quad_err, int(r.flagged)]
        for r in results
    ]


def model_functional(model: str, s, alpha: float, beta: float):
    s = np.asarray(s, dtype=float)
    if model == "sqrt_s":
        return np.sqrt(s)
    if model == "s_pow_beta_over_alpha":
        return s ** (beta / alpha)
    if model == "sqrt_s_log_s":
        return np.sqrt(s * np.log(s))
    if model == "s_pow_1_over_2alpha":
        return s ** (1.0 / (2.0 * alpha))
    raise ValueError(f"unknown model {model!r}; choose one of {', '.join(MODELS)}")


def fit_exponent_arrays(s, p, model: str, alpha: float, beta: float, *, baseline: float = 0.0) -> ExponentFit:
    """Least squares of log(-log p) on log g(s); slope 1 when g matches the decay.

    A positive ``baseline`` is subtracted from -log p first (a diagnostic for
    removing the s = 0 mass of the target ball; the default fits the raw curve).
    """
    s = np.asarray(s, dtype=float)
    p = np.asarray(p, dtype=float)
    ok = (p > 1e-6) & (p < 1 - 1e-6)
    g = model_functional(model, s, alpha, beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        excess = -np.log(p) - baseline
    ok &= np.isfinite(g) & (g > 0) & (excess > 0)
    if ok.sum() < 5:
        raise ValueError("need at least 5 curve points with p in (1e-6, 1 - 1e-6)")
    x = np.log(g[ok])
    y = np.log(excess[ok])
    if np.ptp(x) == 0:
        raise ValueError("degenerate curve: all s give the same functional value")
    res = stats.linregress(x, y)
    return ExponentFit(
        model=model, slope=float(res.slope), intercept=float(res.intercept),
        r2=float(res.rvalue**2), window=(float(s[ok].min()), float(s[ok].max())),
        slope_stderr=float(res.stderr),
    )


def fit_exponent(curve: TailCurve, model: str, *, baseline: float = 0.0) -> ExponentFit:
    return fit_exponent_arrays(
        curve.s_values(), curve.p_values(), model, curve.params.alpha, curve.params.beta, baseline=baseline
    )


def target_ball_mass(params: ModelParams) -> float:
    """mu(B_Q(R)) = (n/pi) int rho(r) phi(r) dr by adaptive quadrature."""
    a, R = params.alpha, params.R
    pts = [max(R - d, 0.0) for d in (30.0, 10.0, 3.0, 1.0) if d < R]
    val, _ = integrate.quad(
        lambda r: stationary_density(r, a, R) * float(phi_raw(r, R)), 0.0, R,
        points=pts or None, epsabs=0.0, epsrel=1e-12, limit=400,
    )
    return params.n / math.pi * val


def _config_seed(seed: int, c: int) -> int:
    return int(np.random.SeedSequence(int(seed), spawn_key=(rngmod.NS_CONFIG, c)).generate_state(1, np.uint64)[0])


def direct_tail_mc(
    s: float,
    params: ModelParams,
    mode: MovementMode | str,
    configurations: int,
    cfg: SimConfig,
    seed: int,
) -> tuple[float, tuple[float, float], int]:
    """Fraction of full sampled configurations with no detection by s.

    Every particle is simulated independently until it detects or reaches s;
    configuration c and particle i use stream (seed, c, i). Returns
    (estimate, Wilson 95% interval, undetected count).
    """
    run = dataclasses.replace(cfg, horizon=s)
    mode = MovementMode.parse(mode)
    undetected = 0
    for c in range(configurations):
        conf = sample_configuration(params, _config_seed(seed, c))
        detected = False
        for i in range(len(conf)):
            x0 = PolarPoint(float(conf.r[i]), float(conf.theta[i]))
            g = rngmod.stream(seed, rngmod.NS_CONFIG, c, i)
            if dynamics.simulate_detection(x0, params, mode, run, g).hit:
                detected = True
                break
        undetected += not detected
    return undetected / configurations, wilson_interval(undetected, configurations), undetected


@dataclass
class RegionShare:
    s: float
    inside: float
    total: float
    ratio: float


def region_share(env: NodeEnvelopes, grid: QuadratureGrid, region: RegionSpec) -> list[RegionShare]:
    """Detection mass from start points inside ``region`` relative to the total, per s."""
    inside = aggregate_from_envelopes(env, grid, region=region)
    total = aggregate_from_envelopes(env, grid)
    return [RegionShare(a.s, a.I_hat, b.I_hat, a.I_hat / b.I_hat if b.I_hat > 0 else math.nan) for a, b in zip(inside, total)]


__all__ = [
    "AggregateResult",
    "MODELS",
    "NodeEnvelopes",
    "QuadratureGrid",
    "aggregate_from_envelopes",
    "aggregate_tail",
    "direct_tail_mc",
    "estimate_point_detection",
    "fit_exponent",
    "fit_exponent_arrays",
    "model_functional",
    "target_ball_mass",
    "node_envelopes",
    "region_share",
    "tail_curve",
    "tail_rows",
]
