import csv

import highspy
import numpy as np
import pytest
import scipy.sparse as sp

from otsldr.cli import read_case
from otsldr.errors import NameCollisionError
from otsldr.evaluation import COLUMNS, EvaluationTable
from otsldr.formulation import build_deterministic, build_primal_ldr
from otsldr.ingest import mps
from otsldr.ingest.csvio import (
    fmt,
    read_scenarios_csv,
    read_solution_csv,
    write_csv_report,
    write_scenarios_csv,
    write_solution_csv,
)
from otsldr.network import build_grid, build_operators
from otsldr.program import ProgramBuilder
from otsldr.solver import solve_milp
from otsldr.solver.report import OPTIMAL, SolveReport
from otsldr.uncertainty import box_support

from helpers import setup, two_bus_doc


def read_back(text, tmp_path):
    path = tmp_path / "p.mps"
    path.write_text(text, encoding="utf-8")
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    return h.getLp()


def assert_round_trip(prog, lp):
    assert (lp.num_col_, lp.num_row_) == (prog.n_vars, prog.n_rows)
    A = sp.csc_matrix((np.array(lp.a_matrix_.value_), np.array(lp.a_matrix_.index_),
                       np.array(lp.a_matrix_.start_)), shape=(prog.n_rows, prog.n_vars))
    assert abs(A - prog.A).max() <= 1e-12 if prog.n_rows else True
    assert np.allclose(lp.col_cost_, prog.c, atol=1e-12, rtol=0)
    inf = highspy.kHighsInf
    clip = lambda v: np.clip(v, -inf, inf)
    assert np.allclose(lp.col_lower_, clip(prog.lb), atol=1e-12, rtol=0)
    assert np.allclose(lp.col_upper_, clip(prog.ub), atol=1e-12, rtol=0)
    lo, hi = prog.row_bounds()
    assert np.allclose(lp.row_lower_, clip(lo), atol=1e-12, rtol=0)
    assert np.allclose(lp.row_upper_, clip(hi), atol=1e-12, rtol=0)
    ints = np.array([int(v) for v in lp.integrality_]) if len(lp.integrality_) else \
        np.zeros(prog.n_vars, int)
    assert int((ints == 1).sum()) == prog.n_binary


def test_one_variable_lp(tmp_path):
    b = ProgramBuilder("one")
    x = b.add_vars("x", (1,))
    b.add_rows("r", [(np.ones((1, 1)), x)], ">=", 1.0)
    b.add_objective(x, 1.0)
    prog = b.build()
    text = mps.export_program(prog, "one")
    body = text.split("ROWS\n")[1].split("COLUMNS\n")[0].splitlines()
    assert body == [" N  COST", " G  R0000001"]
    assert_round_trip(prog, read_back(text, tmp_path))


def test_no_constraints(tmp_path):
    b = ProgramBuilder("free")
    x = b.add_vars("x", (2,), lb=0.0, ub=3.0)
    b.add_objective(x, [1.0, -1.0])
    prog = b.build()
    text = mps.export_program(prog)
    assert text.split("ROWS\n")[1].split("COLUMNS\n")[0].splitlines() == [" N  COST"]
    assert_round_trip(prog, read_back(text, tmp_path))


def test_two_bus_binaries(tmp_path):
    grid, ops = setup(two_bus_doc(lines=2))
    prog = build_deterministic(grid, ops, 1)
    text = mps.export_program(prog)
    assert "'INTORG'" in text and "'INTEND'" in text
    lp = read_back(text, tmp_path)
    assert_round_trip(prog, lp)
    assert sum(int(v) for v in lp.integrality_) == int(grid.switchable.sum())


def test_case14_programs_round_trip(tmp_path):
    grid = build_grid(read_case("case14"))
    ops = build_operators(grid)
    poly = box_support(grid.xi_min, grid.xi_max)
    for prog in (build_deterministic(grid, ops, 2), build_primal_ldr(grid, ops, 2, poly)):
        assert_round_trip(prog, read_back(mps.export_program(prog), tmp_path))


def test_name_limit():
    assert mps._mangle("C", 3) == ["C0000001", "C0000002", "C0000003"]
    with pytest.raises(NameCollisionError):
        mps._mangle("C", 10**7)


# ---------------------------------------------------------------- CSV


def test_fixed_decimal_row(tmp_path):
    rep = SolveReport(status=OPTIMAL, objective=364.1, z=np.array(
        [1.0 if l + 1 not in (9, 13, 18, 20) else 0.0 for l in range(20)]))
    path = write_csv_report(rep, tmp_path / "r.csv")
    lines = path.read_bytes().decode().split("\r\n")
    assert lines[1].startswith("364.100000000,9;13;18;20,")


def test_empty_table_header_only(tmp_path):
    path = write_csv_report(EvaluationTable(), tmp_path / "e.csv")
    text = path.read_bytes().decode()
    assert text == ",".join(c for c in COLUMNS if c != "wall_seconds") + "\r\n"


def test_three_rows_four_lines(tmp_path):
    table = EvaluationTable()
    for k in range(3):
        table.add(method="ldr", L_o=k, objective=1.0 + k, open_lines=[1, 2])
    path = write_csv_report(table, tmp_path / "t.csv", timings=True)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 4 and rows[0][-2:] == ["wall_seconds", "open_lines"]


def test_fmt():
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(-0.0) == "0.000000000"
    assert fmt(np.inf) == "inf" and fmt(np.nan) == "" and fmt(None) == ""
    assert fmt(True) == "1" and fmt(np.int64(4)) == "4"
    assert fmt([1, 5]) == "1;5"


def test_quoting(tmp_path):
    table = EvaluationTable()
    table.add(method='a,"b"', objective=1.0)
    with open(write_csv_report(table, tmp_path / "q.csv"), newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[1][0] == 'a,"b"'


def test_solution_and_scenario_files(tmp_path):
    grid, ops = setup(two_bus_doc())
    prog = build_deterministic(grid, ops, 0)
    rep = solve_milp(prog)
    sol = read_solution_csv(write_solution_csv(rep, prog, tmp_path / "s.csv"))
    assert list(sol) == prog.var_names()
    assert np.array_equal(list(sol.values()), rep.x)
    xi = np.random.default_rng(0).random((5, 3))
    assert np.array_equal(read_scenarios_csv(write_scenarios_csv(xi, tmp_path / "x.csv")), xi)
