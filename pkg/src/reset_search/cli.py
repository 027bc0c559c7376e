"""Command-line interface: evaluation, optimization, tables, simulation.

JSON-first output with explicit units tags ("sigma2_over_D",
"sigma3_over_D", "time"), since the 3D results live in anomalous
sigma^3/D units and silent unit confusion is the main user hazard.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

from . import analytic, mc, optimize
from .model import (BridgeReset, ExpectedTime, FixedTarget, GaussianTarget,
                    PeriodicReset, PoissonianReset, SearchSpec,
                    UnsupportedCombination, from_dimensionless,
                    DimensionlessParams)
from .quad import NonConvergence

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSUPPORTED = 2
EXIT_NONCONVERGENCE = 3
EXIT_IO = 4
EXIT_CENSORING = 5

CSV_HEADER = ["theorem", "mechanism", "dim", "argmin", "min",
              "paper_argmin", "paper_min", "rel_dev_argmin", "rel_dev_min"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the contract is 1
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _mechanism(args):
    if args.mechanism == "poisson":
        if args.rate is None:
            raise _Usage("--rate is required for the poisson mechanism")
        return PoissonianReset(rate=args.rate)
    if args.period is None:
        raise _Usage(f"--period is required for the {args.mechanism} mechanism")
    cls = PeriodicReset if args.mechanism == "periodic" else BridgeReset
    return cls(period=args.period)


class _Usage(Exception):
    pass


def _spec(args):
    eps0 = args.eps0 if args.dim >= 2 else None
    return SearchSpec(dimension=args.dim, diffusion=args.diffusion,
                      mechanism=_mechanism(args), detection_radius=eps0)


def _parse_point(text, dim):
    coords = [float(c) for c in text.split(",")]
    if len(coords) == 1 and dim > 1:
        coords = coords + [0.0] * (dim - 1)
    if len(coords) != dim:
        raise _Usage(f"--target-a needs {dim} comma-separated coordinates")
    return tuple(coords)


def _expected_time_json(et: ExpectedTime):
    if et.is_divergent:
        return {"divergent": True}
    return {"divergent": False, "value": et.unwrap()}


def _emit(report, pretty):
    if pretty:
        _pretty_print(report)
    else:
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")


def _pretty_print(report, prefix=""):
    for key, val in report.items():
        if isinstance(val, dict):
            print(f"{prefix}{key}:")
            _pretty_print(val, prefix + "  ")
        else:
            print(f"{prefix}{key:24s} {val}")


def _report(command, args, results, t0, seed=None):
    rep = {
        "schema": 1,
        "command": command,
        "argv": sys.argv[1:],
        "parameters": {k: v for k, v in vars(args).items()
                       if k not in ("func", "pretty") and v is not None},
        "results": results,
        "wall_time_s": round(time.perf_counter() - t0, 6),
    }
    if seed is not None:
        rep["seed"] = seed
    return rep


# --- eval -----------------------------------------------------------------------

def cmd_eval(args):
    t0 = time.perf_counter()
    spec = _spec(args)
    if args.target_a is not None:
        point = _parse_point(args.target_a, args.dim)
        q = analytic.FixedTargetQuery(spec=spec, a=point)
        if args.dim == 3 and isinstance(spec.mechanism, BridgeReset):
            lower, upper = analytic.bridge_fixed_3d_bounds(
                spec.mechanism.period, spec.diffusion, point, spec.detection_radius)
            results = {"bounds": {"lower": lower.unwrap(), "upper": upper.unwrap()},
                       "units": "time", "provenance": "analytic-closed-form"}
        else:
            et = analytic.fixed_expected_time(q)
            results = {"expected_time": _expected_time_json(et), "units": "time",
                       "provenance": "analytic-closed-form"}
    else:
        q = analytic.GaussQuery(spec=spec, sigma2=args.sigma2)
        et = analytic.gauss_expected_time(q)
        dp = analytic.to_dimensionless(spec, args.sigma2)
        provenance = ("quadrature"
                      if (args.dim >= 2 and isinstance(spec.mechanism, PoissonianReset))
                      or (isinstance(spec.mechanism, PeriodicReset))
                      else "analytic-closed-form")
        results = {
            "expected_time": _expected_time_json(et),
            "dimensionless": dp.s if dp.s is not None else dp.script_T,
            "units": analytic.units_label(args.dim),
            "provenance": provenance,
        }
        scaling = analytic.eps0_scaling_label(args.dim)
        if scaling:
            results["eps0_scaling"] = scaling
    _emit(_report("eval", args, results, t0), args.pretty)
    return EXIT_OK


# --- optimize --------------------------------------------------------------------

_THEOREM_BY_KEY = {(1, "poisson"): 1, (1, "bridge"): 2, (1, "periodic"): 3,
                   (3, "poisson"): 4, (3, "bridge"): 5, (3, "periodic"): 6,
                   (2, "poisson"): 7}


def cmd_optimize(args):
    t0 = time.perf_counter()
    key = (args.dim, args.mechanism)
    if key not in _THEOREM_BY_KEY:
        raise UnsupportedCombination(
            f"no Gaussian-target objective for dim={args.dim}, mechanism={args.mechanism}")
    tid = _THEOREM_BY_KEY[key]
    bracket = optimize.BRACKETS[tid]
    if args.bracket:
        lo, hi = (float(x) for x in args.bracket.split(":"))
        bracket = (lo, hi)
    opt = optimize.minimize_scalar(optimize.OBJECTIVES[tid], bracket,
                                   x_tol=args.x_tol)
    D, sigma2 = args.diffusion, args.sigma2
    if args.mechanism == "poisson":
        dim_param = from_dimensionless(DimensionlessParams(s=opt.argmin), D, sigma2)
        dim_name = "rate"
    else:
        dim_param = from_dimensionless(
            DimensionlessParams(script_T=opt.argmin), D, sigma2)
        dim_name = "period"
    sigma = math.sqrt(sigma2)
    unit = sigma ** 3 / D if args.dim == 3 else sigma2 / D
    results = {
        "argmin_dimensionless": opt.argmin,
        "min_dimensionless": opt.min_value,
        f"argmin_{dim_name}": dim_param,
        "min_scaled": opt.min_value * unit,
        "units": analytic.units_label(args.dim),
        "x_tolerance": opt.x_tolerance,
        "function_evaluations": opt.function_evaluations,
        "provenance": "quadrature",
    }
    scaling = analytic.eps0_scaling_label(args.dim)
    if scaling:
        results["eps0_scaling"] = scaling
    _emit(_report("optimize", args, results, t0), args.pretty)
    return EXIT_OK


# --- table -----------------------------------------------------------------------

def _grid_spec(text):
    lo, hi, n = text.split(":")
    return float(lo), float(hi), int(n)


def cmd_table(args):
    t0 = time.perf_counter()
    if args.curve:
        if not (args.mechanism and args.dim and args.grid):
            raise _Usage("--curve requires --mechanism, --dim and --grid lo:hi:n")
        tid = _THEOREM_BY_KEY.get((args.dim, args.mechanism))
        if tid is None:
            raise UnsupportedCombination(
                f"no objective for dim={args.dim}, mechanism={args.mechanism}")
        lo, hi, n = _grid_spec(args.grid)
        f = optimize.OBJECTIVES[tid]
        rows = []
        for i in range(n):
            x = lo + (hi - lo) * i / (n - 1)
            y = f(x)
            yv = y.as_float() if isinstance(y, ExpectedTime) else float(y)
            rows.append((x, yv))
        try:
            with open(args.out, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["param", "value"])
                w.writerows(rows)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
        results = {"rows": n, "out": args.out, "provenance": "quadrature"}
        _emit(_report("table", args, results, t0), args.pretty)
        return EXIT_OK

    rows = optimize.optimal_constants()
    try:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for row in rows:
                o = row.optimum
                w.writerow([
                    row.theorem, row.mechanism, row.dimension,
                    f"{o.argmin:.8g}", f"{o.min_value:.8g}",
                    row.reported_argmin, row.reported_min,
                    f"{abs(o.argmin - row.reported_argmin) / row.reported_argmin:.3e}",
                    f"{abs(o.min_value - row.reported_min) / row.reported_min:.3e}",
                ])
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    results = {"rows": len(rows), "out": args.out, "provenance": "quadrature"}
    _emit(_report("table", args, results, t0), args.pretty)
    return EXIT_OK


# --- simulate --------------------------------------------------------------------

def _analytic_counterpart(spec, target):
    """(label, value_or_bounds) when an analytic counterpart exists."""
    m = spec.mechanism
    if isinstance(target, FixedTarget):
        if spec.dimension == 3 and isinstance(m, BridgeReset):
            lo, hi = analytic.bridge_fixed_3d_bounds(
                m.period, spec.diffusion, target.point, spec.detection_radius)
            return "bounds", (lo.unwrap(), hi.unwrap())
        q = analytic.FixedTargetQuery(spec=spec, a=target.point)
        return "value", analytic.fixed_expected_time(q).as_float()
    # Gaussian targets: only d = 1 has an un-scaled analytic value.
    if spec.dimension == 1:
        q = analytic.GaussQuery(spec=spec, sigma2=target.sigma2)
        return "value", analytic.gauss_expected_time(q).as_float()
    return None, None


def cmd_simulate(args):
    t0 = time.perf_counter()
    spec = _spec(args)
    if args.target_a is not None:
        target = FixedTarget(point=_parse_point(args.target_a, args.dim))
    else:
        target = GaussianTarget(sigma2=args.sigma2)
    dt = args.dt if args.dt else mc.default_dt(spec, target)
    settings = mc.SimSettings(dt=dt, n_replicates=args.n,
                              max_resets=args.max_resets, seed=args.seed)
    est = mc.estimate_mean(spec, target, settings)
    results = {
        "mean": est.mean,
        "std_error": est.std_error,
        "n": est.n,
        "censored_fraction": est.censored_fraction,
        "dt": dt,
        "units": "time",
        "provenance": "monte-carlo",
    }
    kind, ref = _analytic_counterpart(spec, target)
    if kind == "value" and math.isfinite(ref):
        results["analytic_value"] = ref
        if est.std_error > 0:
            results["z_score"] = (est.mean - ref) / est.std_error
    elif kind == "bounds":
        lo, hi = ref
        results["analytic_bounds"] = {"lower": lo, "upper": hi}
        slack = 3.0 * est.std_error
        results["inside_bounds"] = bool(lo - slack <= est.mean <= hi + slack)
    _emit(_report("simulate", args, results, t0, seed=args.seed), args.pretty)
    return EXIT_OK


# --- parser ----------------------------------------------------------------------

def _add_common(p, need_param=True):
    p.add_argument("--dim", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--mechanism", choices=("poisson", "periodic", "bridge"),
                   required=True)
    if need_param:
        p.add_argument("--rate", type=float)
        p.add_argument("--period", type=float)
    p.add_argument("--diffusion", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--eps0", type=float, default=0.01)
    p.add_argument("--pretty", action="store_true")


def build_parser():
    parser = _Parser(prog="reset-search",
                     description="Diffusive search with resetting: expected "
                                 "times, optima, and Monte Carlo checks")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("eval", help="evaluate one expectation")
    _add_common(p)
    p.add_argument("--target-a", help="fixed target (comma-separated coordinates)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="minimize over the reset parameter")
    p.add_argument("--dim", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--mechanism", choices=("poisson", "periodic", "bridge"),
                   required=True)
    p.add_argument("--diffusion", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--bracket", help="lo:hi search bracket (dimensionless)")
    p.add_argument("--x-tol", type=float, default=1e-6)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("table", help="optimal-constants table or curve CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--curve", action="store_true")
    p.add_argument("--dim", type=int, choices=(1, 2, 3))
    p.add_argument("--mechanism", choices=("poisson", "periodic", "bridge"))
    p.add_argument("--grid", help="lo:hi:n evaluation grid for --curve")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("simulate", help="Monte Carlo estimate")
    _add_common(p)
    p.add_argument("--target-a", help="fixed target (comma-separated coordinates)")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--dt", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-resets", type=int, default=10 ** 5)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnsupportedCombination as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (NonConvergence, optimize.NoFiniteValue) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except mc.ExcessiveCensoring as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CENSORING
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
