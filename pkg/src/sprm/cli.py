"""Command-line entry point: ``sprm <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 solver or budget failure, 3 data error.
The environment variable ``TSCRR_TOL`` overrides the default integrality
tolerance used by ``fit`` and ``relax``.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .bench import ingest_csv, run_benchmark
from .errors import (BudgetExceeded, CapacityError, CutLimitExceeded, DataError,
                     InfeasibleError, NumericalBreakdown, PreconditionError)
from .fractional import FpModel
from .oracle import DEFAULT_BIG_M, DEFAULT_NODE_BUDGET, MilpInstance, solve_milp_exact
from .poly import Dataset, design_matrix, enumerate_basis
from .relaxation import INTEGRALITY_TOL, solve_linear_relaxation
from .synthetic import BUNDLED, bundled_path
from .tscrr import TscrrConfig, fit_tscrr, save_model
from .verify import SUITE, run_suite

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _default_tol() -> float:
    raw = os.environ.get("TSCRR_TOL")
    if raw is None:
        return INTEGRALITY_TOL
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"TSCRR_TOL={raw!r} is not a number") from None


# -- output ------------------------------------------------------------------------

def _emit(records: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        json.dump(records if len(records) != 1 else records[0], out, indent=2, sort_keys=True)
        out.write("\n")
    elif fmt == "csv":
        keys = list(records[0]) if records else []
        w = csv.DictWriter(out, keys, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow({k: (";".join(map(str, v)) if isinstance(v, (list, tuple)) else v)
                        for k, v in r.items()})
    else:
        for r in records:
            out.write(" ".join(f"{k}={_text(v)}" for k, v in r.items()) + "\n")


def _text(v) -> str:
    if isinstance(v, (list, tuple)):
        return "{" + ", ".join(map(str, v)) + "}"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


# -- data loading --------------------------------------------------------------------

def _load_data(args) -> Dataset:
    if args.bundled:
        fname, features, target = BUNDLED[args.bundled]
        return ingest_csv(bundled_path(fname), target, features)
    if not args.data:
        raise UsageError("one of --data or --bundled is required")
    if not args.target or not args.features:
        raise UsageError("--data needs --target and --features")
    return ingest_csv(args.data, args.target, [f.strip() for f in args.features.split(",")])


def _add_data_flags(p):
    p.add_argument("--data", help="CSV file with a header row")
    p.add_argument("--bundled", choices=sorted(BUNDLED), help="use a bundled synthetic dataset")
    p.add_argument("--target", help="target column name (with --data)")
    p.add_argument("--features", help="comma-separated feature columns (with --data)")
    p.add_argument("--degree", type=int, default=2, help="polynomial degree (default 2)")
    p.add_argument("--lm", type=int, required=True, help="number of monomials to select")
    p.add_argument("--lb", type=int, required=True, help="number of points to keep")
    p.add_argument("--big-m", type=float, default=DEFAULT_BIG_M, help="big-M bound (default 1000)")


def _add_common(p):
    p.add_argument("--format", choices=("json", "csv", "text"), default="text",
                   help="output format (default text)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized parts (default 0)")


# -- subcommands -------------------------------------------------------------------------

def cmd_enumerate(args, out):
    basis = enumerate_basis(args.n, args.d)
    if args.format == "text":
        out.write(f"{len(basis)}\n")
        for alpha in basis:
            out.write(" ".join(map(str, alpha)) + "\n")
    else:
        _emit([{"index": j, "exponents": list(a)} for j, a in enumerate(basis)]
              if args.format == "csv" else [{"size": len(basis),
                                             "exponents": [list(a) for a in basis]}],
              args.format, out)


def cmd_fit(args, out):
    data = _load_data(args)
    cfg = TscrrConfig(args.degree, args.lm, args.lb, args.big_m, args.rho, args.recovery_scope,
                      integrality_tol=_default_tol())
    res = fit_tscrr(data, cfg)
    if args.out:
        save_model(res.model, args.out)
    _emit([{
        "selected": res.model.labels(),
        "coefficients": [float(c) for c in res.model.coefficients],
        "anomalies": list(res.model.anomalies),
        "gamma": res.recovery_gamma,
        "lower_bound": res.lower_bound,
        "gap": res.gap,
        "certified": res.relaxation.exactness.certified,
    }], args.format, out)


def cmd_oracle(args, out):
    data = _load_data(args)
    basis = enumerate_basis(data.n, args.degree)
    inst = MilpInstance(design_matrix(data.X, basis), data.y, args.lm, args.lb, args.big_m)
    sol = solve_milp_exact(inst, args.node_budget, args.method)
    names = data.feature_names or None
    _emit([{
        "selected": [basis.label(j, names) for j in sol.support],
        "coefficients": [float(sol.c[j]) for j in sol.support],
        "anomalies": list(sol.excluded),
        "gamma": sol.gamma,
        "nodes": sol.nodes,
        "big_m_valid": sol.big_m_valid,
    }], args.format, out)


def cmd_relax(args, out):
    data = _load_data(args)
    basis = enumerate_basis(data.n, args.degree)
    fp = FpModel.build(design_matrix(data.X, basis), data.y, args.lm, args.lb, args.big_m,
                       args.rho)
    sol = solve_linear_relaxation(fp, integrality_tol=_default_tol(), trace_csv=args.trace)
    ex = sol.exactness
    _emit([{
        "lower_bound": sol.objective,
        "cuts": sol.cuts,
        "quad_residual": sol.quad_residual,
        "integrality_gap": ex.integrality_gap,
        "literal_residual": ex.literal_residual,
        "certified": ex.certified,
    }], args.format, out)


def cmd_verify(args, out):
    results = run_suite(args.seed, args.only)
    recs = [{"property": r.name, "status": "PASS" if r.passed else "FAIL", "checked": r.checked,
             "worst": float(f"{r.worst:.3e}"), "detail": r.detail} for r in results]
    if args.format == "text":
        for r in recs:
            out.write(f"{r['status']} {r['property']} checked={r['checked']} "
                      f"worst={r['worst']:.3e} {r['detail']}".rstrip() + "\n")
    else:
        _emit(recs, args.format, out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_SOLVER


def cmd_bench(args, out):
    summary = run_benchmark(args.config, args.out, args.jobs)
    recs = []
    for ds in summary["datasets"]:
        if "error" in ds:
            recs.append({"dataset": ds["name"], "status": "error", "detail": ds["error"]})
        else:
            recs.append({"dataset": ds["name"], "status": "ok",
                         "detail": f"{len(ds['metrics'])} rows"})
    _emit(recs, args.format, out)
    return EXIT_OK if all(r["status"] == "ok" for r in recs) else EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sprm", description="Sparse polynomial minimax regression with "
                                          "anomaly filtering.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("enumerate", help="list the monomial basis")
    p.add_argument("--n", type=int, required=True, help="number of variables")
    p.add_argument("--d", type=int, required=True, help="maximum total degree")
    _add_common(p)
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("fit", help="two-step relaxation and recovery fit")
    _add_data_flags(p)
    p.add_argument("--rho", type=float, default=None, help="mapping parameter")
    p.add_argument("--recovery-scope", choices=("kept-only", "all-points"), default="kept-only",
                   help="rows used by the coefficient recovery LP")
    p.add_argument("--out", help="write the fitted model to this file")
    _add_common(p)
    p.set_defaults(fn=cmd_fit)

    p = sub.add_parser("oracle", help="exact MILP solution by search")
    _add_data_flags(p)
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET,
                   help="maximum number of LPs solved")
    p.add_argument("--method", choices=("auto", "enumerate", "bnb"), default="auto",
                   help="search strategy")
    _add_common(p)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("relax", help="lower bound from the linear relaxation")
    _add_data_flags(p)
    p.add_argument("--rho", type=float, default=None, help="mapping parameter")
    p.add_argument("--trace", help="write the cut iteration log to this CSV")
    _add_common(p)
    p.set_defaults(fn=cmd_relax)

    p = sub.add_parser("verify", help="run the property suite")
    p.add_argument("--only", action="append", choices=list(SUITE),
                   help="run only this property (repeatable)")
    _add_common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bench", help="run the benchmark harness on a config file")
    p.add_argument("config", help="INI file with one section per dataset")
    p.add_argument("--out", default="bench_out", help="output directory")
    p.add_argument("--jobs", type=int, default=None, help="parallel datasets (default: cores)")
    _add_common(p)
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        np.random.seed(args.seed)
        code = args.fn(args, out)
        return EXIT_OK if code is None else code
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (BudgetExceeded, CutLimitExceeded, InfeasibleError, NumericalBreakdown,
            CapacityError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (PreconditionError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
