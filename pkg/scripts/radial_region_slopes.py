"""Local log-log slope of the radial detection-region measure against s^{1/(2 alpha)}.

The slope approaches 1 only for large s; over the simulated window it stays
well below 1, which is the expected shape of the simulated radial tail curve.
"""

import argparse

import numpy as np

from hypdetect import regions
from hypdetect.config import ModelParams, RegionSpec


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=float, default=2000.0)
    ap.add_argument("--alpha", type=float, default=0.75)
    ap.add_argument("--kappa", type=float, default=1.0)
    ap.add_argument("--s-max", type=float, default=4096.0)
    a = ap.parse_args()
    p = ModelParams(n=a.n, nu=1.0, alpha=a.alpha, beta=0.5)
    s = np.geomspace(2.0, a.s_max, 24)
    mu = []
    for si in s:
        try:
            mu.append(regions.measure_mu_D(RegionSpec("radial", float(si), a.kappa, p)))
        except ValueError:
            break
    s = s[: len(mu)]
    g = s ** (1 / (2 * a.alpha))
    local = np.gradient(np.log(mu), np.log(g))
    for si, mi, li in zip(s, mu, local):
        print(f"s={si:9.2f}  mu={mi:10.4f}  local slope={li:.3f}")


if __name__ == "__main__":
    main()
