"""Command-line interface: ``rwl1 {theory,converge,solve,experiment}``.

Exit codes: 0 success, 1 invalid input, 2 runtime failure.
"""

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import theory
from .core import MeasurementInstance, read_matrix_csv, read_vector_csv, write_vector_csv
from .exceptions import ConfigError, NotConvergedWarning
from .experiments import (ExperimentConfig, SUMMARY_COLUMNS, convergence_study,
                          format_histogram, run_experiment, write_convergence_csv,
                          write_summary_csv, write_trials_csv)
from .reweight import reweighted_l1
from .solver import solve_weighted_l1

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
FULL_SCALE_TRIALS = 500


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default; validation errors are status 1 here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_grid(text):
    """Parse ``lo:hi:step`` into an inclusive grid."""
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must look like lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise UsageError(f"invalid grid {text!r}")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(n)]


def parse_list(text):
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _fmt(v):
    return format(float(v), ".17g")


def cmd_theory(args):
    if (args.delta is None) == (args.delta_grid is None):
        raise UsageError("give exactly one of --delta or --delta-grid")
    deltas = [args.delta] if args.delta is not None else parse_grid(args.delta_grid)
    try:
        rows = [theory.constants_from_delta(d, args.alpha_form) for d in deltas]
    except theory.DeltaOutOfRange as exc:
        raise UsageError(str(exc))
    cols = ("delta", "rho", "alpha", "C", "Cprime", "Cdoubleprime")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for r in rows:
                fh.write(",".join(_fmt(getattr(r, c)) for c in cols) + "\n")
    print("".join(f"{c:>14}" for c in cols))
    for r in rows:
        print("".join(f"{getattr(r, c):>14.6f}" for c in cols))
    return EXIT_OK


def cmd_converge(args):
    eps_list = parse_list(args.eps_list)
    deltas = parse_grid(args.delta_grid)
    if args.mu <= 0 or any(e < 0 for e in eps_list):
        raise UsageError("--mu must be positive and epsilons nonnegative")
    try:
        rows = convergence_study(args.mu, eps_list, deltas, args.rel_tol)
    except theory.DeltaOutOfRange as exc:
        raise UsageError(str(exc))
    if args.out:
        write_convergence_csv(args.out, rows)
    print(f"{'mu':>8}{'epsilon':>10}{'delta':>8}{'L_exact':>12}{'iters':>8}")
    for r in rows:
        if r.admissible:
            print(f"{r.mu:>8g}{r.epsilon:>10g}{r.delta:>8.3f}{r.L_exact:>12.6f}{r.iters:>8d}")
        else:
            print(f"{r.mu:>8g}{r.epsilon:>10g}{r.delta:>8.3f}{'inadmissible':>20}")
    return EXIT_OK


def cmd_solve(args):
    try:
        phi = read_matrix_csv(args.phi)
        u = read_vector_csv(args.u)
        inst = MeasurementInstance(phi, u, args.epsilon)
        w = read_vector_csv(args.weights) if args.weights else None
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConvergedWarning)
        if args.reweight:
            if w is not None:
                raise UsageError("--weights and --reweight are mutually exclusive")
            trace = reweighted_l1(inst)
            xhat = trace.final
            # report the last solve through the same fields as a single solve
            objective = float(np.sum(np.abs(xhat)))
            gap = float(np.linalg.norm(phi @ xhat - u) - inst.epsilon)
            iters = trace.n_iterations
            converged = trace.all_converged
        else:
            try:
                res = solve_weighted_l1(inst, w)
            except ValueError as exc:
                raise UsageError(str(exc))
            xhat, objective, gap = res.xhat, res.objective, res.feasibility_gap
            iters, converged = res.iterations_used, res.converged
    write_vector_csv(args.out, xhat)
    label = "outer iterations" if args.reweight else "iterations"
    print(f"objective        {objective:.10g}")
    print(f"feasibility gap  {gap:.3e}")
    print(f"{label:<16} {iters}")
    print(f"converged        {converged}")
    return EXIT_OK


def _load_config(path):
    try:
        with open(path) as fh:
            mapping = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(mapping, dict):
        raise UsageError("config must be a flat JSON object")
    return mapping


def cmd_experiment(args):
    mapping = _load_config(args.config) if args.config else {}
    if args.full_scale:
        mapping["trials"] = FULL_SCALE_TRIALS
    if args.trials is not None:
        mapping["trials"] = args.trials
    env_seed = os.environ.get("RWL1_SEED")
    if env_seed is not None:
        try:
            mapping["base_seed"] = int(env_seed)
        except ValueError:
            raise UsageError(f"RWL1_SEED must be an integer, got {env_seed!r}")
    try:
        cfg = ExperimentConfig.from_flat(mapping)
    except ConfigError as exc:
        raise UsageError(f"invalid config: {exc}")
    os.makedirs(args.out_dir, exist_ok=True)
    records, summary = run_experiment(cfg, workers=args.workers)
    write_trials_csv(os.path.join(args.out_dir, "trials.csv"), cfg, records)
    write_summary_csv(os.path.join(args.out_dir, "summary.csv"), summary)
    for name in SUMMARY_COLUMNS[:-1]:
        print(f"{name:<24}{getattr(summary, name)}")
    print(f"{'histogram':<24}{format_histogram(summary.histogram)}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="rwl1", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("theory", help="tabulate error-bound constants")
    p.add_argument("--delta", type=float)
    p.add_argument("--delta-grid", metavar="LO:HI:STEP")
    p.add_argument("--alpha-form", choices=theory.ALPHA_FORMS, default="sqrt")
    p.add_argument("--out", metavar="theory.csv")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("converge", help="iterations for the error recursion to converge")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--eps-list", required=True, metavar="E1,E2,...")
    p.add_argument("--delta-grid", required=True, metavar="LO:HI:STEP")
    p.add_argument("--rel-tol", type=float, default=1e-3)
    p.add_argument("--out", metavar="convergence.csv")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("solve", help="solve one instance from CSV files")
    p.add_argument("--phi", required=True)
    p.add_argument("--u", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--weights")
    p.add_argument("--reweight", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("experiment", help="Monte-Carlo comparison of l1 vs reweighted l1")
    p.add_argument("--config", metavar="cfg.json")
    p.add_argument("--trials", type=int)
    p.add_argument("--full-scale", action="store_true",
                   help=f"run {FULL_SCALE_TRIALS} trials")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"rwl1: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
