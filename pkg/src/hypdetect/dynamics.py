"""Euler-Maruyama integration of particle motion with detection of the target.

The compiled kernels in ``_kernels`` do the stepping; this module owns the
random streams, the normal-buffer refills and the public result records.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import _kernels as K
from . import rng as rngmod
from .config import (
    DetectionOutcome,
    ModelParams,
    MovementMode,
    PolarPoint,
    RadialBarrierSpec,
    SimConfig,
    wrap_angle,
)
from .geometry import in_target_ball_raw, phi_raw
from .sampling import sample_radii

MAX_BLOCK = 1 << 20
# -zeta(1/2) / sqrt(2 pi): discrete-monitoring shift of an absorbing level for unit diffusion
BGK_SHIFT = 0.5825971579390107


class SimulationError(RuntimeError):
    """A trajectory produced a non-finite state."""


def _drive(call: Callable, gen: np.random.Generator, expected: int, reserve: int) -> None:
    block = int(max(2 * reserve, min(expected + reserve, 1 << 16)))
    buf = gen.standard_normal(block)
    pos = 0
    while True:
        pos, status = call(buf, pos)
        if status == K.DONE:
            return
        if status == K.FAILED:
            raise SimulationError("trajectory produced a non-finite state")
        block = min(2 * block, MAX_BLOCK)
        buf = np.concatenate((buf[pos:], gen.standard_normal(block)))
        pos = 0


def _reserve(mode: MovementMode, cfg: SimConfig) -> int:
    per = 2 if mode is MovementMode.MIXED else 1
    return per * cfg.substep_factor


def _shift(cfg: SimConfig) -> float:
    return BGK_SHIFT if cfg.continuity_correction else 0.0


def _noise(rng, size: int) -> np.ndarray:
    if isinstance(rng, np.random.Generator):
        return rng.standard_normal(size)
    return np.full(size, float(rng))


def step_radial(r: float, dt: float, rng, params: ModelParams, cfg: SimConfig | None = None) -> float:
    """One radial Euler-Maruyama step of length dt with fold reflection at R.

    ``rng`` is a Generator, or a number used as the value of every normal
    draw (useful to switch the noise off). Below ``origin_floor`` the step is
    split into ``substep_factor`` sub-steps taken on the squared radius.
    """
    cfg = cfg or SimConfig(dt=dt, horizon=max(dt, 1.0))
    if not (0.0 <= r <= params.R):
        raise ValueError(f"radius must lie in [0, R], got {r}")
    if dt == 0:
        return r
    z = _noise(rng, cfg.substep_factor + 1)
    rn = K.single_radial_step(
        r, dt, z[0], z[1:], params.alpha, params.R, cfg.origin_floor, cfg.substep_factor
    )
    if not math.isfinite(rn):
        raise SimulationError(f"radial step from r={r} failed")
    return float(rn)


def step_angular(theta: float, r: float, dt: float, rng, params: ModelParams) -> float:
    """theta + cosech(beta r) sqrt(dt) N(0,1), wrapped to (-pi, pi]."""
    if r <= 0.0:
        raise ValueError("angular step needs r > 0 (the angular variance is infinite at the origin)")
    z = float(_noise(rng, 1)[0])
    return wrap_angle(theta + K.cosech_scalar(params.beta * r) * math.sqrt(dt) * z)


def simulate_detection(
    x0: PolarPoint,
    params: ModelParams,
    mode: MovementMode | str,
    cfg: SimConfig,
    rng: np.random.Generator,
) -> DetectionOutcome:
    """Run one particle until it meets the closed target ball or the horizon."""
    mode = MovementMode.parse(mode)
    cfg.validate_for(params)
    if not (0.0 <= x0.r <= params.R):
        raise ValueError("starting radius outside [0, R]")
    if bool(in_target_ball_raw(x0.r, x0.theta, params.R)):
        return DetectionOutcome(True, 0.0, x0.r, 0.0, 0, None)
    r0 = x0.r
    if mode is not MovementMode.RADIAL and x0.r == 0.0:
        raise ValueError("the origin is not a valid start for angular motion")
    state = np.zeros(8)
    state[K.S_R] = r0
    state[K.S_TH] = x0.theta
    state[K.S_MINR] = r0
    phi_const = float(phi_raw(r0, params.R))
    nsteps = int(math.ceil(cfg.horizon / cfg.dt - 1e-9))
    trace = np.zeros((nsteps + 1, 4)) if cfg.trace else K.empty_trace()
    if cfg.trace:
        trace[0] = (0.0, r0, x0.theta, 0.0)
    per = 2 if mode is MovementMode.MIXED else 1

    def call(buf, pos):
        return K.detect_kernel(
            state, buf, pos, mode.code, params.alpha, params.beta, params.R, cfg.dt,
            cfg.horizon, cfg.origin_floor, cfg.substep_factor,
            phi_const, _shift(cfg), trace, 1,
        )

    _drive(call, rng, per * nsteps, _reserve(mode, cfg))
    hit = state[K.S_HIT] > 0.5
    steps = int(state[K.S_STEPS])
    tr = None
    if cfg.trace:
        tr = trace[: steps + 1].copy()
        if hit:
            tr[steps] = (state[K.S_HITT], state[K.S_R], wrap_angle(state[K.S_TH]), state[K.S_I])
    return DetectionOutcome(
        hit=bool(hit),
        hit_time=float(state[K.S_HITT]) if hit else math.nan,
        min_radius=float(state[K.S_MINR]),
        variance_integral=float(state[K.S_I]),
        steps=steps,
        trace=tr,
    )


def write_trace(outcome: DetectionOutcome, path) -> None:
    if outcome.trace is None:
        raise ValueError("outcome carries no trace; run with SimConfig(trace=True)")
    np.savetxt(path, outcome.trace, delimiter=",", header="t,r,theta,I", comments="", fmt="%.17g")


CHUNK = 4096


def _pair(rng: np.random.Generator) -> tuple[np.random.Generator, np.random.Generator]:
    """Main and sub-step generators for a single path driven by ``rng``."""
    return rng, rng.spawn(1)[0]


def run_batch(
    r0s: np.ndarray,
    params: ModelParams,
    mode: MovementMode | str,
    cfg: SimConfig,
    nsteps: int,
    generators: list[tuple[np.random.Generator, np.random.Generator]],
    cp_steps: np.ndarray | None = None,
    k_level: float = -1.0,
    stop_when_full: bool = False,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Advance a batch of independent paths for ``nsteps`` base steps.

    Each path owns a (main, sub-step) generator pair: the main generator
    supplies the normals of every base step in fixed chunks, the second one
    the extra normals of sub-steps near the origin. A path's trajectory is
    therefore the same whichever batch it runs in.

    Returns (state, up, dn): the final state matrix (columns as in
    ``_kernels.B_*``) and the checkpoint extremes (see :func:`path_envelope`).
    """
    mode = MovementMode.parse(mode)
    r0s = np.asarray(r0s, dtype=float)
    P = r0s.size
    cps = np.zeros(0, dtype=np.int64) if cp_steps is None else np.asarray(cp_steps, dtype=np.int64)
    st = np.zeros((P, K.B_NCOL))
    phi0 = np.asarray(phi_raw(r0s, params.R), dtype=float).reshape(P)
    st[:, K.B_R] = r0s
    st[:, K.B_UP] = phi0
    st[:, K.B_DN] = phi0
    st[:, K.B_MINR] = r0s
    st[:, K.B_PHI0] = phi0
    up = np.full((P, cps.size), np.nan)
    dn = np.full((P, cps.size), np.nan)
    kidx = np.zeros(P, dtype=np.int64)
    n0 = int(np.sum(cps == 0))
    up[:, :n0] = phi0[:, None]
    dn[:, :n0] = phi0[:, None]
    kidx[:] = n0
    per = 2 if mode is MovementMode.MIXED else 1
    cap = 64 * per * cfg.substep_factor
    xpool = np.zeros((P, cap))
    xpos = np.zeros(P, dtype=np.int64)
    xlen = np.zeros(P, dtype=np.int64)

    def refill(j: int) -> None:
        keep = xpool[j, xpos[j] : xlen[j]].copy()
        fresh = generators[j][1].standard_normal(cap - keep.size)
        xpool[j, : keep.size] = keep
        xpool[j, keep.size :] = fresh
        xpos[j] = 0
        xlen[j] = cap

    for c0 in range(0, nsteps, CHUNK):
        c1 = min(nsteps, c0 + CHUNK)
        rows = c1 - c0
        zr = np.empty((rows, P))
        zt = np.empty((rows, P)) if mode is MovementMode.MIXED else zr
        for j in range(P):
            z = generators[j][0].standard_normal(per * rows)
            if per == 2:
                z = z.reshape(rows, 2)
                zr[:, j] = z[:, 0]
                zt[:, j] = z[:, 1]
            else:
                zr[:, j] = z
        i0, j0 = c0, 0
        while True:
            ri, rj = K.batch_kernel(
                st, zr, zt, c0, xpool, xpos, xlen, i0, j0, c1, mode.code, params.alpha,
                params.beta, params.R, cfg.dt, cfg.origin_floor, cfg.substep_factor, _shift(cfg), k_level, stop_when_full, cps, kidx, up, dn,
            )
            if ri < 0:
                break
            refill(rj)
            i0, j0 = ri, rj
    if not np.all(np.isfinite(st[:, : K.B_MINR + 1])):
        raise SimulationError("a path produced a non-finite state")
    return st, up, dn


def radial_path(
    r0: float,
    params: ModelParams,
    horizon: float,
    cfg: SimConfig,
    rng: np.random.Generator,
    k_level: float = -1.0,
) -> tuple[float, float, float]:
    """Reflected radial path over [0, horizon].

    Returns (final radius, time spent at radius <= k_level, minimum radius).
    """
    nsteps = int(round(horizon / cfg.dt))
    st, _, _ = run_batch(np.array([r0]), params, MovementMode.RADIAL, cfg, nsteps, [_pair(rng)], k_level=k_level)
    return float(st[0, K.B_R]), float(st[0, K.B_OCC]), float(st[0, K.B_MINR])


def path_generators(seed: int, namespace: int, ids, tag: int = 0):
    return [
        (rngmod.stream(seed, namespace, tag, int(i), 0), rngmod.stream(seed, namespace, tag, int(i), 1))
        for i in ids
    ]


def radial_ensemble(
    r0s: np.ndarray,
    params: ModelParams,
    horizon: float,
    cfg: SimConfig,
    seed: int,
    *,
    k_level: float = -1.0,
    tag: int = 0,
    batch: int = 64,
) -> np.ndarray:
    """Run independent radial paths; returns the final state matrix.

    Path i uses the streams keyed by (seed, path namespace, tag, i).
    """
    r0s = np.asarray(r0s, dtype=float)
    nsteps = int(round(horizon / cfg.dt))
    out = np.empty((r0s.size, K.B_NCOL))
    for b0 in range(0, r0s.size, batch):
        ids = range(b0, min(r0s.size, b0 + batch))
        gens = path_generators(seed, rngmod.NS_PATH, ids, tag)
        st, _, _ = run_batch(r0s[b0 : b0 + batch], params, MovementMode.RADIAL, cfg, nsteps, gens, k_level=k_level)
        out[b0 : b0 + len(ids)] = st
    return out


def stationary_radius(params: ModelParams, rng: np.random.Generator) -> float:
    return float(sample_radii(rng.random(), params))


def occupation_time(
    params: ModelParams,
    k: float,
    s: float,
    cfg: SimConfig,
    rng: np.random.Generator,
    start: "str | float" = "stationary",
) -> float:
    """Time the radial process spends in (0, k] up to time s (left-endpoint rule)."""
    if not (0.0 < k <= params.R):
        raise ValueError("need 0 < k <= R")
    r0 = stationary_radius(params, rng) if start == "stationary" else float(start)
    return radial_path(r0, params, s, cfg, rng, k_level=k)[1]


def occupation_ensemble(
    params: ModelParams, k: float, s: float, runs: int, cfg: SimConfig, seed: int, *, tag: int = 0
) -> np.ndarray:
    """Occupation times of (0, k] up to s for ``runs`` stationary starts."""
    if not (0.0 < k <= params.R):
        raise ValueError("need 0 < k <= R")
    u = rngmod.stream(seed, rngmod.NS_PATH, tag, -1 % (1 << 32)).random(runs)
    r0s = sample_radii(u, params)
    return radial_ensemble(r0s, params, s, cfg, seed, k_level=k, tag=tag)[:, K.B_OCC]


def radial_first_passage(
    y: float,
    spec: RadialBarrierSpec,
    rng: np.random.Generator,
    *,
    reflect_top: bool = True,
    dt: float = 1e-3,
    t_max: float = 1e4,
    cfg: SimConfig | None = None,
    continuity_correction: bool = True,
) -> tuple[int, float]:
    """First passage of the radial diffusion started at y to level y0.

    With ``reflect_top`` the level Y folds the path back; otherwise Y is
    absorbing too. Returns (exit code, time) where the code is 0 for y0, 1 for
    Y and 2 when censored at ``t_max``. The continuity correction shifts
    absorbing levels inward by BGK_SHIFT sqrt(dt), which removes the leading
    bias of checking the level only at grid times.
    """
    cfg = cfg or SimConfig(dt=dt, horizon=t_max)
    if not (spec.y0 <= y <= spec.Y):
        raise ValueError("start outside [y0, Y]")
    if y <= spec.y0:
        return 0, 0.0
    if not reflect_top and y >= spec.Y:
        return 1, 0.0
    state = np.array([0.0, y, 2.0, 0.0])

    def call(buf, pos):
        return K.passage_kernel(
            state, buf, pos, spec.alpha, spec.y0, spec.Y, reflect_top, dt, t_max,
            cfg.origin_floor, cfg.substep_factor, BGK_SHIFT if continuity_correction else 0.0,
        )

    _drive(call, rng, 1 << 14, cfg.substep_factor)
    return int(state[K.F_EXIT]), float(state[K.F_TIME])


def passage_sample(
    y: float,
    spec: RadialBarrierSpec,
    paths: int,
    seed: int,
    *,
    reflect_top: bool,
    dt: float = 1e-3,
    t_max: float = 1e4,
    tag: int = 0,
    continuity_correction: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """First passages of ``paths`` independent paths from y; path i uses stream (seed, passage namespace, tag, i)."""
    codes = np.empty(paths, dtype=np.int64)
    times = np.empty(paths)
    for i in range(paths):
        g = rngmod.stream(seed, rngmod.NS_PASSAGE, tag, i)
        codes[i], times[i] = radial_first_passage(
            y, spec, g, reflect_top=reflect_top, dt=dt, t_max=t_max, continuity_correction=continuity_correction
        )
    return codes, times


def path_envelope(
    r0: float,
    params: ModelParams,
    mode: MovementMode | str,
    checkpoints: np.ndarray,
    cfg: SimConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Angular reach of one path at each checkpoint.

    Returns arrays (up, dn) with up = max(W + phi(r)), dn = max(phi(r) - W)
    over the path so far, W the angular displacement. A particle started at
    angle theta0 has met the target by the checkpoint iff theta0 lies, modulo
    2 pi, in [-up, dn]; the covered arc length is min(2 pi, up + dn).
    Checkpoints are rounded to the dt grid.
    """
    cp_steps = checkpoint_steps(checkpoints, cfg.dt)
    _, up, dn = run_batch(
        np.array([r0]), params, mode, cfg, int(cp_steps[-1]), [_pair(rng)], cp_steps=cp_steps, stop_when_full=True
    )
    return up[0], dn[0]


def checkpoint_steps(checkpoints, dt: float) -> np.ndarray:
    cps = np.asarray(checkpoints, dtype=float)
    if cps.ndim != 1 or cps.size == 0 or np.any(np.diff(cps) <= 0) or cps[0] < 0:
        raise ValueError("checkpoints must be a non-empty increasing sequence of times")
    steps = np.rint(cps / dt).astype(np.int64)
    if np.any(np.diff(steps) <= 0):
        raise ValueError("checkpoints collapse on the dt grid")
    return steps


def envelope_ensemble(
    r0: float,
    params: ModelParams,
    mode: MovementMode | str,
    checkpoints,
    paths: int,
    cfg: SimConfig,
    seed: int,
    *,
    tag: int = 0,
    batch: int = 64,
) -> tuple[np.ndarray, np.ndarray]:
    """Envelopes of ``paths`` independent paths from radius r0 (rows = paths)."""
    cp_steps = checkpoint_steps(checkpoints, cfg.dt)
    ups, dns = [], []
    for b0 in range(0, paths, batch):
        ids = range(b0, min(paths, b0 + batch))
        gens = path_generators(seed, rngmod.NS_NODE, ids, tag)
        _, up, dn = run_batch(
            np.full(len(ids), r0), params, mode, cfg, int(cp_steps[-1]), gens, cp_steps=cp_steps, stop_when_full=True
        )
        ups.append(up)
        dns.append(dn)
    return np.vstack(ups), np.vstack(dns)


def exponential_functional(
    alpha: float, beta: float, rng: np.random.Generator, *, dt: float = 1e-3, horizon: float | None = None
) -> float:
    """Left-endpoint approximation of the integral of exp(-2 beta X_u) over [0, horizon].

    X is Brownian motion with drift alpha/2 started at 0; the horizon
    defaults to 200/alpha.
    """
    horizon = 200.0 / alpha if horizon is None else horizon
    nsteps = int(round(horizon / dt))
    z = rng.standard_normal(nsteps)
    return float(K.exp_functional_kernel(z, 0.5 * alpha, 2.0 * beta, dt, nsteps))


def functional_sample(
    alpha: float, beta: float, samples: int, seed: int, *, dt: float = 1e-3, horizon: float | None = None, tag: int = 0
) -> np.ndarray:
    """Independent draws of :func:`exponential_functional`; draw i uses stream (seed, functional namespace, tag, i)."""
    return np.array(
        [
            exponential_functional(alpha, beta, rngmod.stream(seed, rngmod.NS_FUNCTIONAL, tag, i), dt=dt, horizon=horizon)
            for i in range(samples)
        ]
    )
