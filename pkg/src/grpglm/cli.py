"""Command-line front end: fit, path, bounds, simulate, roc.

Exit codes: 0 success, 1 input error, 2 numerical non-convergence (the
result file is still written). Every command is a pure function of its
flags and input files, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from .families import Family
from .groups import GroupStructure
from .io import read_dataset_csv
from .penalties import ELASTIC_NET, PENALTY_KINDS, PenaltySpec, SparsityProfile
from .simulate import (
    ROC_DESIGN_IDS,
    ProtocolConfig,
    get_design,
    metrics_json,
    roc_csv,
    roc_curve,
    run_protocol,
    table_report,
)
from .solver import DivergenceError, FitConfig, fit, path, select_lambda

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOCONV = 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract reserves 2 for
    # non-convergence, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _load_groups(arg: str, p: int | None = None) -> GroupStructure:
    if os.path.exists(arg):
        with open(arg) as fh:
            gs = GroupStructure.from_json(fh.read())
    else:
        try:
            gs = GroupStructure([int(s) for s in arg.split(",")])
        except ValueError:
            raise InputError(
                f"--groups: {arg!r} is neither an existing file nor a comma list of sizes"
            ) from None
    if p is not None and gs.p != p:
        raise InputError(f"group sizes cover {gs.p} columns, data has {p}")
    return gs


def _read_data(path_arg: str):
    if not os.path.exists(path_arg):
        raise InputError(f"data file not found: {path_arg}")
    try:
        return read_dataset_csv(path_arg)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _fmt(x):
    return float(format(x, ".17g"))


def _write_json(out_path: str, payload: dict):
    with open(out_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fit_config(args) -> FitConfig:
    return FitConfig(max_iter=args.max_iter, tol=args.tol)


def cmd_fit(args) -> int:
    data = _read_data(args.data)
    gs = _load_groups(args.groups, data.p)
    family = Family.from_name(args.family)
    spec = PenaltySpec(args.penalty, args.rn, args.tn if args.penalty == ELASTIC_NET else 0.0)
    try:
        result = fit(family, data, gs, spec, _fit_config(args))
    except DivergenceError as exc:
        print(f"fit diverged: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    _write_json(
        args.out,
        {
            "beta_hat": [_fmt(v) for v in result.beta_hat],
            "active_groups": list(result.active_groups),
            "kkt_residual": _fmt(result.kkt_residual),
            "iterations": result.iterations,
            "converged": result.converged,
            "objective": _fmt(result.objective_trace[-1]),
        },
    )
    return EXIT_OK if result.converged else EXIT_NOCONV


def cmd_path(args) -> int:
    data = _read_data(args.data)
    gs = _load_groups(args.groups, data.p)
    family = Family.from_name(args.family)
    try:
        pr = path(
            family, data, gs, args.penalty, args.n_lambda,
            args.lambda_min_ratio, _fit_config(args), t_n=args.tn,
        )
    except DivergenceError as exc:
        print(f"path failed: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    payload = {
        "lambda_max": _fmt(pr.lambda_max),
        "lambda_grid": [_fmt(v) for v in pr.lambda_grid],
        "fits": [
            {
                "beta_hat": [_fmt(v) for v in r.beta_hat],
                "kkt_residual": _fmt(r.kkt_residual),
                "iterations": r.iterations,
                "converged": r.converged,
            }
            for r in pr.fits
        ],
    }
    if args.valid_data:
        valid = _read_data(args.valid_data)
        lam, beta = select_lambda(pr, family, valid)
        payload["lambda_opt"] = _fmt(lam)
        payload["beta_opt"] = [_fmt(v) for v in beta]
    _write_json(args.out, payload)
    if all(r.converged for r in pr.fits):
        return EXIT_OK
    return EXIT_NOCONV


def cmd_bounds(args) -> int:
    gs = _load_groups(args.groups)
    try:
        active = [int(s) for s in args.active_groups.split(",")] if args.active_groups else []
        profile = SparsityProfile.from_active_groups(gs, active)
        inputs = bounds_mod.BoundInputs(
            family=Family.from_name(args.family),
            L=args.L, B=args.B, A=args.A, K=args.K,
            n=args.n, G_n=gs.n_groups, gs=gs,
            profile=profile, k_stabil=args.k_stabil,
        )
        report = bounds_mod.bounds_report(inputs, args.rn, args.tn)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _write_json(args.out, {k: (_fmt(v) if isinstance(v, float) else v) for k, v in report.items()})
    return EXIT_OK


def cmd_simulate(args) -> int:
    design = get_design(args.design, seed=args.seed)
    config = ProtocolConfig(
        n_lambda=args.n_lambda,
        lambda_min_ratio=args.lambda_min_ratio,
        fit=FitConfig(max_iter=args.max_iter, tol=args.tol),
    )
    try:
        metrics = [run_protocol(design, args.estimator, args.reps, config)]
    except RuntimeError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    if args.out.endswith(".csv"):
        with open(args.out, "w") as fh:
            fh.write(table_report(metrics)["csv"])
    else:
        with open(args.out, "w") as fh:
            fh.write(metrics_json(metrics))
    return EXIT_OK


def cmd_roc(args) -> int:
    design = get_design(args.design, seed=args.seed)
    if design.id not in ROC_DESIGN_IDS:
        raise InputError(f"--design must be one of {ROC_DESIGN_IDS} for roc")
    try:
        curve = roc_curve(
            design, args.estimator, args.n_lambda,
            FitConfig(max_iter=args.max_iter, tol=args.tol),
        )
    except DivergenceError as exc:
        print(f"roc failed: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    with open(args.out, "w") as fh:
        fh.write(roc_csv(curve))
    return EXIT_OK


def _add_solver_flags(p):
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=10000)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grpglm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one penalized GLM")
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--family", required=True, choices=[f.value for f in Family])
    p_fit.add_argument("--penalty", required=True, choices=list(PENALTY_KINDS))
    p_fit.add_argument("--rn", type=float, required=True)
    p_fit.add_argument("--tn", type=float, default=0.0)
    p_fit.add_argument("--groups", required=True, help="JSON file of sizes or inline list 10,10,...")
    p_fit.add_argument("--out", required=True)
    _add_solver_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_path = sub.add_parser("path", help="regularization path with warm starts")
    p_path.add_argument("--data", required=True)
    p_path.add_argument("--valid-data", default=None, help="optional validation CSV for picking lambda")
    p_path.add_argument("--family", required=True, choices=[f.value for f in Family])
    p_path.add_argument("--penalty", required=True, choices=list(PENALTY_KINDS))
    p_path.add_argument("--tn", type=float, default=0.0)
    p_path.add_argument("--groups", required=True)
    p_path.add_argument("--n-lambda", type=int, default=100)
    p_path.add_argument("--lambda-min-ratio", type=float, default=1e-3)
    p_path.add_argument("--out", required=True)
    _add_solver_flags(p_path)
    p_path.set_defaults(func=cmd_path)

    p_b = sub.add_parser("bounds", help="constants and error-bound calculators")
    p_b.add_argument("--family", required=True, choices=[f.value for f in Family])
    p_b.add_argument("--L", type=float, required=True)
    p_b.add_argument("--B", type=float, required=True)
    p_b.add_argument("--A", type=float, default=2.0)
    p_b.add_argument("--K", type=float, default=1.0)
    p_b.add_argument("--n", type=int, required=True)
    p_b.add_argument("--groups", required=True)
    p_b.add_argument("--active-groups", default="", help="comma list of nonzero group indices")
    p_b.add_argument("--k-stabil", type=float, default=0.5)
    p_b.add_argument("--rn", type=float, required=True)
    p_b.add_argument("--tn", type=float, default=None)
    p_b.add_argument("--out", required=True)
    p_b.set_defaults(func=cmd_bounds)

    p_s = sub.add_parser("simulate", help="train/validate/test protocol over replicates")
    p_s.add_argument("--design", required=True)
    p_s.add_argument("--estimator", required=True, choices=["lasso", "grouplasso"])
    p_s.add_argument("--reps", type=int, default=100)
    p_s.add_argument("--seed", type=int, default=0)
    p_s.add_argument("--n-lambda", type=int, default=100)
    p_s.add_argument("--lambda-min-ratio", type=float, default=0.01)
    p_s.add_argument("--workers", type=int, default=1,
                     help="parallelism cap; results never depend on it")
    p_s.add_argument("--out", required=True)
    p_s.add_argument("--tol", type=float, default=1e-4)
    p_s.add_argument("--max-iter", type=int, default=3000)
    p_s.set_defaults(func=cmd_simulate)

    p_r = sub.add_parser("roc", help="selection-fraction curve over a dense penalty grid")
    p_r.add_argument("--design", required=True)
    p_r.add_argument("--estimator", required=True, choices=["lasso", "grouplasso"])
    p_r.add_argument("--n-lambda", type=int, default=10000)
    p_r.add_argument("--seed", type=int, default=0)
    p_r.add_argument("--out", required=True)
    p_r.add_argument("--tol", type=float, default=1e-4)
    p_r.add_argument("--max-iter", type=int, default=3000)
    p_r.set_defaults(func=cmd_roc)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
