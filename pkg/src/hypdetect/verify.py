"""Simulation-versus-closed-form check suites: radial hitting, angular exit and
the exponential functional. Each check reports estimate, reference and verdict."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import analytics as A
from . import dynamics
from .config import ModelParams, PolarPoint, RadialBarrierSpec, SimConfig
from .harness import estimate_point_detection

# (alpha, y0, Y, lambda, start y)
HITTING_TUPLES = (
    (1.0, 1.0, 3.0, 0.5, 2.0),
    (0.75, 2.0, 4.0, 1.0, 3.0),
    (0.5, 0.5, 2.5, 0.2, 1.5),
    (1.5, 1.0, 2.0, 2.0, 1.5),
    (0.6, 3.0, 5.0, 0.1, 4.0),
)

EXIT_PARAMS = ModelParams(n=100, nu=1.0, alpha=0.75, beta=0.5)
# (distance below R, theta0, s)
EXIT_POINTS = (
    (0.5, 0.06, 4.0),
    (1.0, 0.10, 4.0),
    (2.0, 0.25, 4.0),
    (3.0, 0.50, 8.0),
    (0.0, 0.04, 8.0),
    (0.2, 0.03, 16.0),
)

DUFRESNE_ALPHA, DUFRESNE_BETA = 1.2, 1.0
DUFRESNE_HORIZON = 100.0
DUFRESNE_QUANTILES = (0.5, 0.1, 0.01)
DUFRESNE_SLOPE_WINDOW = (0.002, 0.05)


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    estimate: float
    reference: float
    tolerance: float
    passed: bool

    def row(self) -> list:
        return [self.suite, self.name, self.estimate, self.reference, self.tolerance, "PASS" if self.passed else "FAIL"]


CHECK_HEADER = ["suite", "check", "estimate", "reference", "tolerance", "verdict"]


def hitting_suite(paths: int = 10_000, dt: float = 1e-3, seed: int = 2024) -> list[Check]:
    """Per tuple: hit probability of y0 before Y, mean time from the reflector,
    Laplace transform and conditional mean against their bounds."""
    out = []
    for i, (a, y0, Y, lam, y) in enumerate(HITTING_TUPLES):
        spec = RadialBarrierSpec(a, y0, Y)
        label = f"a={a},y0={y0},Y={Y}"
        codes, times = dynamics.passage_sample(y, spec, paths, seed, reflect_top=False, dt=dt, tag=3 * i)
        hit = codes == 0
        G = A.hitting_prob_G(y, spec)
        se = math.sqrt(G * (1 - G) / paths)
        out.append(Check("hitting", f"G {label}", float(hit.mean()), G, 3 * se, abs(hit.mean() - G) <= 3 * se))
        t_hit = times[hit]
        cb = A.conditional_mean_bound(y, spec)
        cse = float(t_hit.std(ddof=1) / math.sqrt(t_hit.size))
        out.append(Check("hitting", f"conditional mean {label}", float(t_hit.mean()), cb, 3 * cse,
                         t_hit.mean() <= cb + 3 * cse))

        codes, times = dynamics.passage_sample(Y, spec, paths, seed, reflect_top=True, dt=dt, tag=3 * i + 1)
        m = A.mean_hit_time_from_reflector(spec)
        rel = float(times.mean() / m - 1.0)
        out.append(Check("hitting", f"mean time from Y {label}", float(times.mean()), m, 0.05 * m, abs(rel) <= 0.05))

        codes, times = dynamics.passage_sample(y, spec, paths, seed, reflect_top=True, dt=dt, tag=3 * i + 2)
        lt = np.exp(-lam * times)
        lb = A.laplace_bound(lam, y, spec)
        lse = float(lt.std(ddof=1) / math.sqrt(paths))
        out.append(Check("hitting", f"Laplace lambda={lam} {label}", float(lt.mean()), lb, 3 * lse,
                         lt.mean() <= lb + 3 * lse))
    return out


def exit_suite(trajectories: int = 10_000, dt: float = 1e-3, seed: int = 2025) -> list[Check]:
    """Angular-only detection frequency against the exact Brownian exit probability."""
    p = EXIT_PARAMS
    out = []
    for i, (d, th, s) in enumerate(EXIT_POINTS):
        x0 = PolarPoint(p.R - d, th)
        exact = A.angular_detection_prob(x0, p, s)
        est, _ = estimate_point_detection(x0, p, "angular", s, trajectories, SimConfig(dt=dt, horizon=s), seed, tag=i)
        se = math.sqrt(exact * (1 - exact) / trajectories)
        out.append(Check("exit", f"r=R-{d},theta={th},s={s}", est, exact, 3 * se, abs(est - exact) <= 3 * se))
    return out


def dufresne_suite(samples: int = 50_000, dt: float = 1e-3, seed: int = 2026) -> list[Check]:
    """Empirical tail of the truncated functional against the inverse-gamma law.

    With W_h the functional truncated at the horizon and slack = P(W - W_h >= delta),
    P(W_h >= x) <= P(W >= x) <= P(W_h >= x - delta) + slack, so the exact tail
    must lie in that bracket widened by three standard errors.
    """
    a, b = DUFRESNE_ALPHA, DUFRESNE_BETA
    w = dynamics.functional_sample(a, b, samples, seed, dt=dt, horizon=DUFRESNE_HORIZON)
    out = []
    for q in DUFRESNE_QUANTILES:
        x = A.dufresne_quantile_x(q, a, b)
        delta = 1e-6 * x
        slack = A.dufresne_truncation_slack(a, b, DUFRESNE_HORIZON, delta)
        lo = float(np.mean(w >= x))
        hi = float(np.mean(w >= x - delta))
        se = math.sqrt(q * (1 - q) / samples)
        ok = lo - 3 * se <= q <= hi + 3 * se + slack
        out.append(Check("dufresne", f"tail at {q} quantile", lo, q, 3 * se + slack, ok))
    k, _ = A.dufresne_shape_scale(a, b)
    xs = np.sort(w)[::-1]
    tail = np.arange(1, samples + 1) / samples
    sel = (tail >= DUFRESNE_SLOPE_WINDOW[0]) & (tail <= DUFRESNE_SLOPE_WINDOW[1])
    slope = float(stats.linregress(np.log(xs[sel]), np.log(tail[sel])).slope)
    out.append(Check("dufresne", "tail log-log slope", slope, -k, 0.05, abs(slope + k) <= 0.05))
    return out


SUITES = {"hitting": hitting_suite, "exit": exit_suite, "dufresne": dufresne_suite}


def run_suites(names, size: int | None = None, seed: int | None = None) -> list[Check]:
    """Run the named suites; ``size`` overrides each suite's path count."""
    out = []
    for name in names:
        kwargs = {}
        if size is not None:
            kwargs[{"hitting": "paths", "exit": "trajectories", "dufresne": "samples"}[name]] = size
        if seed is not None:
            kwargs["seed"] = seed
        out.extend(SUITES[name](**kwargs))
    return out
