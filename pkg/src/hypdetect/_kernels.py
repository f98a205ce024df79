"""Compiled Euler-Maruyama path kernels.

Kernels consume standard normals from a caller-supplied buffer and return
the next unread position. When fewer than ``reserve`` normals remain they
stop early with status NEED_MORE; the Python driver then appends a fresh
block from the trajectory's own generator and calls again. All kernel state
lives in a small float64 array so a call can resume exactly where it left off.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

NEED_MORE = 0
DONE = 1
FAILED = 2

ANGULAR = 0
RADIAL = 1
MIXED = 2

TWO_PI = 2.0 * math.pi
N_BISECT = 30
R_TINY = 1e-12


@njit(cache=True)
def phi_scalar(r, R):
    if r <= 0.0:
        return 0.5 * math.pi
    a = R - 0.5 * r
    if a < 1.0:
        ls_a = math.log(math.sinh(a)) if a > 0.0 else -math.inf
    else:
        ls_a = a + math.log1p(-math.exp(-2.0 * a)) - math.log(2.0)
    if R < 1.0:
        ls_R = math.log(math.sinh(R))
    else:
        ls_R = R + math.log1p(-math.exp(-2.0 * R)) - math.log(2.0)
    h = 0.5 * r
    lc = h + math.log1p(math.exp(-2.0 * h)) - math.log(2.0)
    v = 0.5 * math.exp(ls_a - ls_R - lc)
    if v > 0.5:
        v = 0.5
    return 2.0 * math.asin(math.sqrt(v))


@njit(cache=True)
def radial_drift(r, alpha):
    return 0.5 * alpha / math.tanh(alpha * r)


@njit(cache=True)
def cosech_scalar(x):
    if x > 700.0:
        return 0.0
    return 1.0 / math.sinh(x)


@njit(cache=True)
def cosech_at(beta, r):
    """cosech(beta r), kept finite at the origin where the angle is effectively uniform."""
    return cosech_scalar(beta * max(r, R_TINY))


@njit(cache=True)
def fold(r, R):
    """Reflect r into [0, R]; reflections at 0 and R have period 2R."""
    r = abs(r) % (2.0 * R)
    if r > R:
        r = 2.0 * R - r
    return r


@njit(cache=True)
def radial_free(r, h, z, alpha, floor):
    """One radial step of length h without the reflection at R.

    Above ``floor``: Euler on r. Below: Euler on y = r^2, whose drift
    1 + a r coth(a r) stays bounded at the origin, truncated at y = 0.
    """
    if r >= floor:
        return abs(r + radial_drift(r, alpha) * h + math.sqrt(h) * z)
    a = alpha * r
    g = a / math.tanh(a) if a > 1e-8 else 1.0
    y = r * r + (1.0 + g) * h + 2.0 * r * math.sqrt(h) * z
    return math.sqrt(y) if y > 0.0 else 0.0


@njit(cache=True)
def radial_update(r, h, z, alpha, R, floor):
    rn = radial_free(r, h, z, alpha, floor)
    if rn > R:
        rn = fold(rn, R)
    return rn


@njit(cache=True)
def wrap(theta):
    t = theta - TWO_PI * math.floor(theta / TWO_PI + 0.5)
    if t <= -math.pi:
        t += TWO_PI
    elif t > math.pi:
        t -= TWO_PI
    return t


@njit(cache=True)
def hull_hits(ta, pa, tb, pb):
    """True if some multiple of 2 pi lies within the hull of the two arcs
    [ta - pa, ta + pa] and [tb - pb, tb + pb] (unwrapped angles)."""
    lo = min(ta - pa, tb - pb)
    hi = max(ta + pa, tb + pb)
    return math.ceil(lo / TWO_PI) <= math.floor(hi / TWO_PI)


@njit(cache=True)
def phi_slope(r, R):
    """|d phi / dr|, from phi = 2 asin(sqrt(v)) and d log v / dr."""
    p = phi_scalar(r, R)
    return 0.5 * math.tan(0.5 * p) * (1.0 / math.tanh(R - 0.5 * r) + math.tanh(0.5 * r))


@njit(cache=True)
def monitored_arc(r, R, beta, mode, phi_const, sh):
    """Target half-arc at radius r widened by ``sh`` times the noise rate
    normal to the ball boundary, in angle units. With sh = shift * sqrt(h)
    this offsets the crossings missed between grid times."""
    p = phi_const if mode == ANGULAR else phi_scalar(r, R)
    if sh == 0.0:
        return p
    rate2 = 0.0
    if mode != RADIAL:
        c = cosech_at(beta, r)
        rate2 += c * c
    if mode != ANGULAR:
        g = phi_slope(r, R)
        rate2 += g * g
    return p + sh * math.sqrt(rate2)


@njit(cache=True)
def refine_fraction(ra, ta, rb, tb, mode, R, beta, phi_const, sh_a, sh):
    """Smallest fraction of the step (to 2**-30) at which the straight line
    from (ra, ta) to (rb, tb) has met the monitored arc."""
    pa = monitored_arc(ra, R, beta, mode, phi_const, sh_a)
    lo = 0.0
    hi = 1.0
    for _ in range(N_BISECT):
        mid = 0.5 * (lo + hi)
        rm = ra + mid * (rb - ra)
        tm = ta + mid * (tb - ta)
        pm = monitored_arc(rm, R, beta, mode, phi_const, sh)
        if hull_hits(ta, pa, tm, pm):
            hi = mid
        else:
            lo = mid
    return hi


# state layout for detect_kernel
S_T, S_R, S_TH, S_I, S_MINR, S_STEPS, S_HIT, S_HITT = 0, 1, 2, 3, 4, 5, 6, 7


@njit(cache=True)
def detect_kernel(state, buf, pos, mode, alpha, beta, R, dt, horizon, floor,
                  subf, phi_const, shift, trace, trace_every):
    """Integrate one particle until it meets the target ball or the horizon.

    Arcs at grid times after the start are widened by ``shift`` (see
    :func:`monitored_arc`); the starting arc is the exact one."""
    per = 2 if mode == MIXED else 1
    reserve = per * subf
    n = buf.shape[0]
    t = state[S_T]
    r = state[S_R]
    th = state[S_TH]
    acc = state[S_I]
    minr = state[S_MINR]
    steps = int(state[S_STEPS])
    status = DONE
    while t < horizon * (1.0 - 1e-12):
        if pos + reserve > n:
            status = NEED_MORE
            break
        hbase = min(dt, horizon - t)
        remaining = hbase
        hit = False
        while remaining > 0.0:
            h = remaining
            if r < floor and mode != ANGULAR and h > dt / subf:
                h = dt / subf
            rn = r
            tn = th
            c = cosech_at(beta, r)
            acc += c * c * h
            if mode != RADIAL:
                tn = th + c * math.sqrt(h) * buf[pos]
                pos += 1
            if mode != ANGULAR:
                rn = radial_update(r, h, buf[pos], alpha, R, floor)
                pos += 1
            if not (math.isfinite(rn) and math.isfinite(tn)):
                state[S_T] = t
                return pos, FAILED
            sh = shift * math.sqrt(h)
            sh_a = 0.0 if (steps == 0 and remaining == hbase) else sh
            pa = monitored_arc(r, R, beta, mode, phi_const, sh_a)
            pb = monitored_arc(rn, R, beta, mode, phi_const, sh)
            if hull_hits(th, pa, tn, pb):
                f = refine_fraction(r, th, rn, tn, mode, R, beta, phi_const, sh_a, sh)
                state[S_HITT] = t + (hbase - remaining) + f * h
                acc -= (1.0 - f) * c * c * h
                rn = r + f * (rn - r)
                tn = th + f * (tn - th)
                if rn < minr:
                    minr = rn
                r = rn
                th = tn
                hit = True
                break
            r = rn
            th = tn
            if r < minr:
                minr = r
            remaining -= h
            if remaining <= 1e-12 * dt:
                remaining = 0.0
        steps += 1
        if hit:
            t = state[S_HITT]
            state[S_HIT] = 1.0
            break
        t += hbase
        th = wrap(th)
        if trace.shape[0] > 0 and steps % trace_every == 0:
            k = steps // trace_every
            if k < trace.shape[0]:
                trace[k, 0] = t
                trace[k, 1] = r
                trace[k, 2] = th
                trace[k, 3] = acc
    state[S_T] = t
    state[S_R] = r
    state[S_TH] = wrap(th)
    state[S_I] = acc
    state[S_MINR] = minr
    state[S_STEPS] = steps
    return pos, status


# column layout of the batch state matrix
B_R, B_W, B_UP, B_DN, B_OCC, B_MINR, B_FULL, B_PHI0 = 0, 1, 2, 3, 4, 5, 6, 7
B_NCOL = 8


@njit(cache=True)
def _record(st, j, mode, R, cp_steps, kidx, done_steps, out_up, out_dn):
    ncp = cp_steps.shape[0]
    while kidx[j] < ncp and cp_steps[kidx[j]] == done_steps:
        out_up[j, kidx[j]] = st[j, B_UP]
        out_dn[j, kidx[j]] = st[j, B_DN]
        kidx[j] += 1


@njit(cache=True)
def batch_kernel(st, zr, zt, row0, xpool, xpos, xlen, i0, j0, i1, mode, alpha, beta, R,
                 dt, floor, subf, shift, k_level, stop_when_full, cp_steps, kidx,
                 out_up, out_dn):
    """Advance P independent paths through global steps i0..i1-1.

    Row i - row0 of ``zr``/``zt`` holds the step-i normals of every path.
    Sub-steps near the origin draw further normals from the per-path pool
    ``xpool``; when a pool may run dry the kernel returns (i, j) so the
    caller can top it up and resume at exactly that path and step. Returns
    (-1, -1) once all steps are done.

    Tracks per path: radius, unwrapped angular displacement W, running
    max(W + a) and max(a - W) with a the monitored arc after the start
    (see :func:`monitored_arc`), time at radius <= k_level, minimum
    radius. Checkpoint extremes are written after the step counts listed
    in ``cp_steps``.
    """
    P = st.shape[0]
    per = 2 if mode == MIXED else 1
    sq = math.sqrt(dt)
    for i in range(i0, i1):
        js = j0 if i == i0 else 0
        for j in range(js, P):
            if stop_when_full and st[j, B_FULL] > 0.5:
                _record(st, j, mode, R, cp_steps, kidx, i + 1, out_up, out_dn)
                continue
            r = st[j, B_R]
            w = st[j, B_W]
            up = st[j, B_UP]
            dn = st[j, B_DN]
            occ = st[j, B_OCC]
            minr = st[j, B_MINR]
            p0 = st[j, B_PHI0]
            if mode != ANGULAR and r < floor:
                if xpos[j] + per * subf > xlen[j]:
                    return i, j
                remaining = dt
                first = True
                while remaining > 0.0:
                    h = dt / subf
                    if h > remaining or r >= floor:
                        h = remaining
                    if first:
                        z1 = zr[i - row0, j]
                        z2 = zt[i - row0, j] if mode == MIXED else 0.0
                        first = False
                    else:
                        z1 = xpool[j, xpos[j]]
                        xpos[j] += 1
                        if mode == MIXED:
                            z2 = xpool[j, xpos[j]]
                            xpos[j] += 1
                        else:
                            z2 = 0.0
                    if r <= k_level:
                        occ += h
                    if mode == MIXED:
                        w += cosech_at(beta, r) * math.sqrt(h) * z2
                    r = radial_update(r, h, z1, alpha, R, floor)
                    if r < minr:
                        minr = r
                    p = monitored_arc(r, R, beta, mode, 0.0, shift * math.sqrt(h))
                    if w + p > up:
                        up = w + p
                    if p - w > dn:
                        dn = p - w
                    remaining -= h
                    if remaining <= 1e-12 * dt:
                        remaining = 0.0
            else:
                if r <= k_level:
                    occ += dt
                if mode != RADIAL:
                    w += cosech_scalar(beta * r) * sq * zt[i - row0, j]
                if mode != ANGULAR:
                    r = radial_update(r, dt, zr[i - row0, j], alpha, R, floor)
                    if r < minr:
                        minr = r
                p = monitored_arc(r, R, beta, mode, p0, shift * sq)
                if w + p > up:
                    up = w + p
                if p - w > dn:
                    dn = p - w
            st[j, B_R] = r
            st[j, B_W] = w
            st[j, B_UP] = up
            st[j, B_DN] = dn
            st[j, B_OCC] = occ
            st[j, B_MINR] = minr
            if mode != RADIAL and up + dn >= TWO_PI:
                st[j, B_FULL] = 1.0
            _record(st, j, mode, R, cp_steps, kidx, i + 1, out_up, out_dn)
    return -1, -1


# state layout for passage_kernel
F_T, F_R, F_EXIT, F_TIME = 0, 1, 2, 3


@njit(cache=True)
def passage_kernel(state, buf, pos, alpha, y0, Y, reflect_top, dt, t_max, floor, subf, shift):
    """First passage of the radial diffusion to y0, with Y absorbing or reflecting.

    Exit codes: 0 reached y0, 1 reached Y (absorbing top only), 2 censored.
    Absorbing levels are moved inward by ``shift * sqrt(h)`` to compensate
    for crossings missed between grid times; crossing times are located by
    linear interpolation inside the step.
    """
    reserve = subf
    n = buf.shape[0]
    t = state[F_T]
    r = state[F_R]
    status = DONE
    code = 2
    while t < t_max:
        if pos + reserve > n:
            status = NEED_MORE
            break
        remaining = dt
        while remaining > 0.0:
            h = remaining
            if r < floor and h > dt / subf:
                h = dt / subf
            if reflect_top:
                rn = radial_update(r, h, buf[pos], alpha, Y, floor)
            else:
                rn = radial_free(r, h, buf[pos], alpha, floor)
            pos += 1
            if not math.isfinite(rn):
                return pos, FAILED
            elapsed = dt - remaining
            lo = y0 + shift * math.sqrt(h)
            hi = Y - shift * math.sqrt(h)
            if rn <= lo:
                f = min(1.0, max(0.0, (r - lo) / (r - rn)))
                state[F_TIME] = t + elapsed + f * h
                code = 0
                r = y0
                break
            if (not reflect_top) and rn >= hi:
                f = min(1.0, max(0.0, (hi - r) / (rn - r)))
                state[F_TIME] = t + elapsed + f * h
                code = 1
                r = Y
                break
            r = rn
            remaining -= h
            if remaining <= 1e-12 * dt:
                remaining = 0.0
        if code != 2:
            break
        t += dt
    if code == 2 and status == DONE:
        state[F_TIME] = t
    state[F_T] = t
    state[F_R] = r
    state[F_EXIT] = code
    return pos, status


@njit(cache=True)
def single_radial_step(r, dt, z, extra, alpha, R, floor, subf):
    """One radial step; below ``floor`` it is split into ``subf`` sub-steps
    whose further normals come from ``extra``. Returns the new radius."""
    if r >= floor:
        return radial_update(r, dt, z, alpha, R, floor)
    remaining = dt
    k = 0
    zz = z
    while remaining > 0.0:
        h = dt / subf
        if h > remaining or r >= floor:
            h = remaining
        r = radial_update(r, h, zz, alpha, R, floor)
        zz = extra[k]
        k += 1
        remaining -= h
        if remaining <= 1e-12 * dt:
            remaining = 0.0
    return r


@njit(cache=True)
def exp_functional_kernel(buf, drift, two_beta, dt, nsteps):
    """Left-endpoint sum of exp(-2 beta X) dt for X_u = drift u + B_u, X_0 = 0."""
    x = 0.0
    acc = 0.0
    sq = math.sqrt(dt)
    for i in range(nsteps):
        acc += math.exp(-two_beta * x) * dt
        x += drift * dt + sq * buf[i]
    return acc


@njit(cache=True)
def pareto_partial_sums(u, omega, inv_gamma, m_marks, out):
    """Row-wise partial sums of omega * U^(-1/gamma) at the requested m."""
    reps = u.shape[0]
    nm = m_marks.shape[0]
    for i in range(reps):
        s = 0.0
        j = 0
        for k in range(u.shape[1]):
            s += omega * u[i, k] ** (-inv_gamma)
            if j < nm and k + 1 == m_marks[j]:
                out[i, j] = s
                j += 1
    return out


def empty_trace() -> np.ndarray:
    return np.zeros((0, 4))
