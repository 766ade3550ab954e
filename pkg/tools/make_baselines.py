"""Archive first-solve results of the pinned cases as regression baselines.

These are this package's own values on its own cases, kept so later changes
that move an optimum are noticed.  They are not reference figures.

    python tools/make_baselines.py            # 14-bus only (a few minutes)
    python tools/make_baselines.py --with-118 # adds the 118-bus bound gap (slow)
"""
import argparse
import json
from pathlib import Path

from otsldr.cli import read_case
from otsldr.evaluation import bound_gap, solve_method
from otsldr.network import build_grid, build_operators
from otsldr.uncertainty import box_support, sample

OUT = Path(__file__).resolve().parents[1] / "tests" / "baselines"
BUDGETS = (1, 2, 3, 4)


def _setup(name):
    grid = build_grid(read_case(name))
    return grid, build_operators(grid), box_support(grid.xi_min, grid.xi_max)


def case14():
    grid, ops, poly = _setup("case14")
    xi = sample(poly, 500, 0)
    out = {}
    for L_o in BUDGETS:
        row = {}
        for method in ("det", "saa", "ldr", "dual-ldr", "oracle"):
            rep = solve_method(method, grid, ops, L_o, poly, xi)
            row[method] = {"objective": rep.objective, "open_lines": rep.open_lines}
            print(L_o, method, rep.objective, rep.open_lines, f"{rep.wall_seconds:.1f} s")
        out[str(L_o)] = row
    return out


def case118():
    grid, ops, poly = _setup("case118")
    out = {}
    for L_o in BUDGETS:
        res = bound_gap(grid, ops, L_o, poly)
        out[str(L_o)] = {"UB": res["UB"], "LB": res["LB"],
                         "open_lines_ub": res["ub_report"].open_lines,
                         "open_lines_lb": res["lb_report"].open_lines}
        print(L_o, out[str(L_o)])
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--with-118", action="store_true")
    args = ap.parse_args()
    OUT.mkdir(exist_ok=True)
    (OUT / "case14.json").write_text(json.dumps(case14(), indent=1) + "\n")
    if args.with_118:
        (OUT / "case118_gap.json").write_text(json.dumps(case118(), indent=1) + "\n")


if __name__ == "__main__":
    main()
