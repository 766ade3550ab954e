"""Command line entry point: ``ots-ldr {solve,evaluate,gap,bench,export-mps}``.

Exit codes: 0 on success, 2 when the input does not validate, 3 when a solve
does not reach an optimum.  Tables go to CSV files, summaries to stdout.
"""
from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .config import load_config
from .errors import NumericalError, OTSError
from .evaluation import (
    EvaluationTable,
    SolverFailure,
    bound_gap,
    build_program,
    evaluate_methods,
    scaling_benchmark,
    solve_method,
)
from .ingest.case import load_case, parse_case
from .ingest.csvio import fmt, write_csv_report
from .ingest.mps import write_mps
from .network import build_grid, build_operators
from .solver.report import OPTIMAL
from .uncertainty import box_support, proportional_box, sample

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3
BUILTIN = {"case14": "case14_wind.json", "case118": "case118_wind.json"}
log = logging.getLogger("otsldr")


def read_case(spec):
    """Load a case file path, or one of the shipped cases by name."""
    if spec in BUILTIN:
        text = resources.files("otsldr.data").joinpath(BUILTIN[spec]).read_text("utf-8")
        return parse_case(text, name=spec)
    return load_case(spec)


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _setup(args):
    case = read_case(args.case)
    grid = build_grid(case)
    ops = build_operators(grid)
    degenerate = getattr(args, "method", None) == "det"
    if args.rho is not None:
        poly = proportional_box(grid.wind_nominal, args.rho, allow_degenerate=degenerate)
    else:
        poly = box_support(grid.xi_min, grid.xi_max, allow_degenerate=degenerate)
    return grid, ops, poly


def _budgets(args, grid):
    if args.max_open is None:
        return [grid.max_open]
    return args.max_open


def _check(rep, what):
    if rep.status != OPTIMAL:
        raise SolverFailure(f"{what}: {rep.status}")
    return rep


def cmd_solve(args, cfg):
    grid, ops, poly = _setup(args)
    scen = sample(poly, args.samples, args.seed) if args.method == "saa" else None
    table = EvaluationTable()
    for L_o in _budgets(args, grid):
        rep = _check(solve_method(args.method, grid, ops, L_o, poly, scen, config=cfg,
                                  backend=args.backend), f"{args.method} L_o={L_o}")
        table.add_report(args.method, rep)
        print(f"{args.method} L_o={L_o}: objective {fmt(rep.objective)} $/h, "
              f"open lines [{fmt(rep.open_lines)}], {rep.wall_seconds:.2f} s")
    if args.out:
        write_csv_report(table, args.out, timings=args.timings)
    return EXIT_OK


def cmd_evaluate(args, cfg):
    grid, ops, poly = _setup(args)
    methods = args.methods.split(",")
    table = EvaluationTable()
    for L_o in _budgets(args, grid):
        part = evaluate_methods(grid, ops, L_o, poly, methods, args.samples, args.oos_samples,
                                seed=args.seed, config=cfg, backend=args.backend)
        table.rows.extend(part.rows)
    print("method    L_o  objective        out-of-sample    infeasible  open lines")
    for r in table.rows:
        print(f"{r['method']:<9} {r['L_o']:>3}  {fmt(r['objective']):>15}  "
              f"{fmt(r['out_of_sample_cost']):>15}  {fmt(r['infeasible_scenario_count']):>10}  "
              f"[{fmt(r['open_lines'])}]")
    if args.out:
        write_csv_report(table, args.out, timings=args.timings)
    if any(r["objective"] is None or not np.isfinite(r["objective"]) for r in table.rows):
        return EXIT_SOLVER
    return EXIT_OK


def cmd_gap(args, cfg):
    grid, ops, poly = _setup(args)
    table = EvaluationTable()
    print("L_o  UB ($/h)         LB ($/h)         gap (%)       exact ($/h)      "
          "LDR time (s)")
    status = EXIT_OK
    for L_o in _budgets(args, grid):
        res = bound_gap(grid, ops, L_o, poly, config=cfg, backend=args.backend,
                        oracle={"auto": "auto", "on": True, "off": False}[args.oracle])
        ub, lb = res["ub_report"], res["lb_report"]
        if ub.status != OPTIMAL or lb.status != OPTIMAL:
            status = EXIT_SOLVER
        table.add_report("ldr", ub, bound_gap_percent=res["gap_percent"])
        table.add_report("dual-ldr", lb, bound_gap_percent=res["gap_percent"])
        if "exact_report" in res:
            table.add_report("oracle", res["exact_report"])
        print(f"{L_o:>3}  {fmt(res['UB']):>15}  {fmt(res['LB']):>15}  "
              f"{fmt(res['gap_percent']):>12}  {fmt(res['exact']):>15}  {res['ub_seconds']:.2f}")
    if args.out:
        write_csv_report(table, args.out, timings=args.timings)
    return status


def cmd_bench(args, cfg):
    grid, ops, poly = _setup(args)
    L_o = _budgets(args, grid)[0]
    table = scaling_benchmark(grid, ops, L_o, poly, args.s_list, seed=args.seed, config=cfg,
                              backend=args.backend, solve=not args.no_solve)
    print("method  S      rows      vars      time (s)")
    for r in table.rows:
        print(f"{r['method']:<6}  {fmt(r['S']):>5}  {r['n_rows']:>8}  {r['n_vars']:>8}  "
              f"{r['wall_seconds']:.2f}")
    if args.out:
        write_csv_report(table, args.out, timings=args.timings)
    return EXIT_OK


def cmd_export(args, cfg):
    grid, ops, poly = _setup(args)
    L_o = _budgets(args, grid)[0]
    scen = sample(poly, args.samples, args.seed) if args.method == "saa" else None
    prog = build_program(args.method, grid, ops, L_o, poly, scen)
    out = args.out or f"{grid.name}_{args.method}_L{L_o}.mps"
    write_mps(prog, out)
    print(f"wrote {out}: {prog.n_rows} rows, {prog.n_vars} columns, {prog.n_binary} binaries")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="ots-ldr", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, methods=None, out_help="CSV output path"):
        sp.add_argument("--case", default="case14",
                        help="case file, or a shipped case: " + ", ".join(BUILTIN))
        sp.add_argument("--max-open", type=_int_list, default=None,
                        help="switching budget L_o; comma-separated list allowed")
        sp.add_argument("--rho", type=float, default=None,
                        help="box half-width as a fraction of nominal wind "
                             "(default: the case's own xi bounds)")
        sp.add_argument("--samples", type=int, default=500, help="SAA scenario count")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--backend", choices=["bnb", "highs"], default=None,
                        help="MILP backend (default from config)")
        sp.add_argument("--out", default=None, help=out_help)
        sp.add_argument("--timings", action="store_true",
                        help="include wall-clock columns in the CSV")
        if methods:
            sp.add_argument("--method", choices=methods, required=True)

    all_methods = ["det", "saa", "ldr", "dual-ldr", "oracle"]
    sp = sub.add_parser("solve", help="solve one method")
    common(sp, all_methods)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("evaluate", help="out-of-sample cost test")
    common(sp)
    sp.add_argument("--method", dest="methods", default="saa,ldr",
                    help="comma-separated methods (default saa,ldr)")
    sp.add_argument("--oos-samples", type=int, default=1000)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("gap", help="primal/dual LDR bound gap")
    common(sp)
    sp.add_argument("--oracle", choices=["auto", "on", "off"], default="auto")
    sp.set_defaults(func=cmd_gap)

    sp = sub.add_parser("bench", help="SAA vs LDR size and time scaling")
    common(sp)
    sp.add_argument("--s-list", type=_int_list, default=[10, 50, 100, 500])
    sp.add_argument("--no-solve", action="store_true", help="only build the programs")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("export-mps", help="write a program as MPS")
    common(sp, all_methods, out_help="MPS output path")
    sp.set_defaults(func=cmd_export)
    return p


def run_cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config()
        return args.func(args, cfg)
    except (SolverFailure, NumericalError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OTSError, ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
