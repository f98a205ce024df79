"""Poissonized initial configurations and their expected measures."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as rngmod
from ._numerics import radial_cdf, radial_inverse_cdf
from .config import ModelParams

BLOCK = 1 << 16


@dataclass(frozen=True)
class Configuration:
    r: np.ndarray
    theta: np.ndarray
    seed: int
    params: ModelParams

    def __len__(self) -> int:
        return int(self.r.shape[0])

    def to_csv(self, path: "str | Path") -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "r", "theta"])
            for i, (r, t) in enumerate(zip(self.r, self.theta)):
                w.writerow([i, repr(float(r)), repr(float(t))])


def sample_radii(u, params: ModelParams):
    """Exact inverse-CDF map from uniforms to radii."""
    return radial_inverse_cdf(u, params.alpha, params.R)


def uniform_angles(u):
    """Map uniforms in [0, 1) to angles in (-pi, pi]."""
    return math.pi - 2.0 * math.pi * np.asarray(u)


def sample_configuration(params: ModelParams, seed: int) -> Configuration:
    """Poisson(n) points with i.i.d. radii (sinh density) and uniform angles.

    The count comes from stream (seed, 0); points are then drawn in fixed
    blocks of 65536 from streams (seed, 1 + block index), so any block can be
    regenerated on its own and the result does not depend on how blocks are
    distributed over workers.
    """
    count = int(rngmod.stream(seed, rngmod.NS_SAMPLING, 0).poisson(params.n))
    rs, ts = [], []
    for b, start in enumerate(range(0, count, BLOCK)):
        k = min(BLOCK, count - start)
        g = rngmod.stream(seed, rngmod.NS_SAMPLING, 1 + b)
        u = g.random((2, k))
        rs.append(sample_radii(u[0], params))
        ts.append(uniform_angles(u[1]))
    r = np.concatenate(rs) if rs else np.zeros(0)
    t = np.concatenate(ts) if ts else np.zeros(0)
    return Configuration(r=r, theta=t, seed=int(seed), params=params)


def expected_mu_ball(r, params: ModelParams):
    """Expected number of points within radius r of the origin."""
    return params.n * radial_cdf(r, params.alpha, params.R)


def c_alpha(alpha: float) -> float:
    return 2.0 * alpha / (math.pi * (alpha - 0.5))


def expected_mu_target_cap(params: ModelParams) -> float:
    """Leading-order expected count in the target ball, n C_alpha e^{-R/2}.

    Asymptotic only: the relative error is O(e^{-(alpha - 1/2) R} + e^{-R}).
    """
    return params.n * c_alpha(params.alpha) * math.exp(-params.R / 2.0)


def radial_mass(lo, hi, params: ModelParams):
    """Expected fraction of points with radius in (lo, hi]."""
    return radial_cdf(hi, params.alpha, params.R) - radial_cdf(lo, params.alpha, params.R)
