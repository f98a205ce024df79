"""Command-line entry point. Every table is written as CSV with a JSON sidecar.

Exit codes: 0 success, 1 usage error, 2 a check or bound failed.
"""

from __future__ import annotations

import argparse
import sys

from . import harness, heavytail, io, regions, verify
from .config import ModelParams, MovementMode, ParetoSpec, PolarPoint, RegionSpec, SimConfig, TailCurve, TailEntry

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.75)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--n", type=float, default=100.0)


def _params(a) -> ModelParams:
    return ModelParams(alpha=a.alpha, beta=a.beta, nu=a.nu, n=a.n)


def _config(a, extra: dict | None = None) -> dict:
    cfg = {k: v for k, v in vars(a).items() if k != "func"}
    cfg.update(extra or {})
    return cfg


def cmd_simulate(a) -> int:
    p = _params(a)
    try:
        r, th = _floats(a.x0)
    except ValueError:
        raise UsageError("--x0 must be 'r,theta'")
    x0 = PolarPoint(r, th)
    est, (lo, hi) = harness.estimate_point_detection(
        x0, p, a.mode, a.s, a.trajectories, SimConfig(dt=a.dt, horizon=a.s), a.seed
    )
    header = ["r0", "theta0", "mode", "s", "trajectories", "p_hat", "ci_lo", "ci_hi"]
    row = [x0.r, x0.theta, MovementMode.parse(a.mode).value, a.s, a.trajectories, est, lo, hi]
    print(f"P(T_det <= {a.s}) from ({x0.r}, {x0.theta}) [{row[2]}]: {est:.6g}  95% CI [{lo:.6g}, {hi:.6g}]")
    if a.out:
        io.write_table(a.out, header, [row], _config(a, {"params": p.as_dict()}))
    return EXIT_OK


def cmd_tail_curve(a) -> int:
    p = _params(a)
    grid = harness.QuadratureGrid(n_r=a.grid_r, n_theta=a.grid_theta, theta_method=a.theta_method)
    s_values = sorted(a.s_list)
    cfg = SimConfig(dt=a.dt, horizon=max(s_values[-1], a.dt))
    _, res = harness.tail_curve(p, a.mode, s_values, grid, a.trajectories_per_node, a.seed, cfg)
    rows = harness.tail_rows(res)
    for r in res:
        flag = "  (error budget exceeded)" if r.flagged else ""
        print(f"s={r.s:g}  P(T_det >= s)={r.p:.6g}  CI [{r.ci[0]:.6g}, {r.ci[1]:.6g}]{flag}")
    io.write_table(a.out, harness.TAIL_HEADER, rows, _config(a, {"params": p.as_dict(), "grid": grid.as_dict()}))
    return EXIT_OK


def cmd_region(a) -> int:
    p = _params(a)
    spec = RegionSpec(MovementMode.parse(a.mode), a.s, a.kappa, p, regime=a.regime)
    cfg = _config(a, {"params": p.as_dict()})
    if a.measure:
        val, err = regions.measure_mu_D(spec, return_error=True)
        print(f"mu(D) = {val:.10g}  (quadrature error {err:.2g})")
        if a.out:
            io.write_table(a.out, ["mode", "s", "kappa", "mu", "quad_err"], [[spec.mode.value, a.s, a.kappa, val, err]], cfg)
    else:
        tab = regions.boundary_table(spec, a.points)
        io.write_table(a.out, ["r", "theta_boundary"], tab.tolist(), cfg)
        print(f"wrote {len(tab)} boundary points to {a.out}")
    return EXIT_OK


def cmd_verify(a) -> int:
    names = list(verify.SUITES) if a.suite == "all" else [a.suite]
    checks = verify.run_suites(names, size=a.size, seed=a.seed)
    width = max(len(c.name) for c in checks)
    for c in checks:
        verdict = "PASS" if c.passed else "FAIL"
        print(f"{verdict}  {c.suite:<9} {c.name:<{width}}  est={c.estimate:.6g}  ref={c.reference:.6g}  tol={c.tolerance:.3g}")
    if a.out:
        io.write_table(a.out, verify.CHECK_HEADER, [c.row() for c in checks], _config(a))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def cmd_pareto(a) -> int:
    spec = ParetoSpec(omega=a.omega, gamma=a.gamma)
    calib = heavytail.calibrate(spec, L_floor=a.L_floor)
    print(f"calibrated c={calib.c:.6g}, L0={calib.L0:.6g}")
    rows = heavytail.tail_table(spec, a.m, a.L, a.replicas, a.seed, calib)
    bad = False
    for r in rows:
        over = r["violation_sigmas"] > 3.0
        bad |= over
        print(
            f"m={r['m']} L={r['L']:g} threshold={r['threshold']:.6g} mc={r['mc_estimate']:.6g} "
            f"bound={r['bound']:.6g}{'  VIOLATION' if over else ''}"
        )
    header = ["m", "gamma", "L", "threshold", "mc_estimate", "ci_lo", "ci_hi", "bound"]
    if a.out:
        io.write_table(a.out, header, [[r[c] for c in header] for r in rows],
                       _config(a, {"c": calib.c, "L0": calib.L0}))
    return EXIT_FAIL if bad else EXIT_OK


def cmd_fit(a) -> int:
    rows = io.read_csv(a.curve)
    try:
        entries = [
            TailEntry(float(r["s"]), float(r["p_hat"]), (float(r["ci_lo"]), float(r["ci_hi"])), int(r["n_effective"]))
            for r in rows
        ]
    except (KeyError, ValueError) as e:
        raise UsageError(f"{a.curve} is not a tail-curve table: {e}")
    p = ModelParams(alpha=a.alpha, beta=a.beta, nu=a.nu, n=a.n)
    curve = TailCurve(entries, MovementMode.parse(a.mode), p)
    fit = harness.fit_exponent(curve, a.model, baseline=a.baseline)
    print(f"model={fit.model} slope={fit.slope:.4f} (se {fit.slope_stderr:.3g}) r2={fit.r2:.4f} window={fit.window}")
    if a.out:
        io.write_table(
            a.out, ["model", "slope", "slope_stderr", "intercept", "r2", "s_min", "s_max"],
            [[fit.model, fit.slope, fit.slope_stderr, fit.intercept, fit.r2, *fit.window]], _config(a),
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hypdetect", description="Target detection by diffusing particles in a hyperbolic disk.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    modes = [m.value for m in MovementMode]

    p = sub.add_parser("simulate", help="per-point detection probability by time s")
    _model_args(p)
    p.add_argument("--mode", choices=modes, default="mixed")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--x0", required=True, help="start point as r,theta")
    p.add_argument("--trajectories", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tail-curve", help="aggregate P(T_det >= s) over a list of s")
    _model_args(p)
    p.add_argument("--mode", choices=modes, default="mixed")
    p.add_argument("--s-list", type=_floats, required=True)
    p.add_argument("--grid-r", type=int, default=48)
    p.add_argument("--grid-theta", type=int, default=64)
    p.add_argument("--theta-method", choices=["exact", "grid"], default="exact")
    p.add_argument("--trajectories-per-node", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tail_curve)

    p = sub.add_parser("region", help="measure or boundary of the detection region")
    _model_args(p)
    p.add_argument("--mode", choices=modes, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--regime", choices=["small", "large"], help="required for the mixed mode")
    what = p.add_mutually_exclusive_group(required=True)
    what.add_argument("--measure", action="store_true")
    what.add_argument("--boundary", action="store_true")
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--out")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("verify-analytics", help="simulation against closed forms; pass/fail table")
    p.add_argument("--suite", choices=["all", *verify.SUITES], default="all")
    p.add_argument("--size", type=int, help="paths per check (defaults per suite)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pareto", help="Pareto sum tails against the calibrated bounds")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--m", type=_ints, required=True)
    p.add_argument("--L", type=_floats, required=True)
    p.add_argument("--L-floor", type=float, help="raise the calibrated L0 to at least this value")
    p.add_argument("--replicas", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("fit", help="tail exponent fit of a tail-curve table")
    _model_args(p)
    p.add_argument("--curve", required=True)
    p.add_argument("--model", choices=harness.MODELS, required=True)
    p.add_argument("--mode", choices=modes, default="mixed")
    p.add_argument("--baseline", type=float, default=0.0, help="subtract this from -log p before fitting")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        return a.func(a)
    except (UsageError, ValueError, heavytail.PreconditionError, FileNotFoundError) as e:
        print(f"hypdetect {a.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
