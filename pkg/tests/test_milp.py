import numpy as np
import pytest

from otsldr.cli import read_case
from otsldr.errors import EnumerationTooLargeError
from otsldr.formulation import build_deterministic
from otsldr.network import build_grid, build_operators
from otsldr.program import ProgramBuilder
from otsldr.solver import enumerate_milp, open_key, solve_lp, solve_milp
from otsldr.solver.report import INFEASIBLE, NODE_LIMIT, OPTIMAL

from helpers import random_case, setup, two_bus_doc


def congested_pair():
    """Cheap gen at bus 1, dear gen at bus 2; the stiff line 1 caps the transfer."""
    doc = two_bus_doc(lines=2, load=100.0)
    doc["lines"][0].update(b=10.0, f_min=-20.0, f_max=20.0)
    doc["gens"].append({"bus": 2, "c": 50.0, "q": 0.0, "g_min": 0.0, "g_max": 200.0,
                        "r_minus": -50.0, "r_plus": 50.0, "agc": True})
    return setup(doc)


def test_fixed_z_single_node():
    grid, ops = congested_pair()
    prog = build_deterministic(grid, ops, 1)
    zb = prog.block("z")
    lb, ub = prog.lb.copy(), prog.ub.copy()
    lb[zb.start:zb.stop] = ub[zb.start:zb.stop] = 1.0
    rep = solve_milp(prog.with_bounds(lb, ub), reclose=False)
    assert rep.status == OPTIMAL and rep.nodes == 1


def test_opening_the_congested_line_pays():
    grid, ops = congested_pair()
    closed = solve_milp(build_deterministic(grid, ops, 0))
    # both closed: flows split 10:1, line 1 binds at 20 MW, so 22 MW come from bus 1
    assert np.isclose(closed.objective, 10 * 22 + 50 * 78)
    rep = solve_milp(build_deterministic(grid, ops, 1))
    assert rep.open_lines == [1]
    assert np.isclose(rep.objective, 10 * 100)


def test_forced_dispatch_and_optional_opening():
    doc = two_bus_doc(load=100.0, g_max=200.0)
    grid, ops = setup(doc)
    for L_o in (0, 1):
        rep = solve_milp(build_deterministic(grid, ops, L_o))
        assert rep.status == OPTIMAL and rep.open_lines == []
        assert np.isclose(rep.objective, 10 * 100)
        assert np.allclose(rep["f"], [1.0])


def test_infeasible_milp():
    grid, ops = setup(two_bus_doc(load=300.0, g_max=200.0))
    assert solve_milp(build_deterministic(grid, ops, 1)).status == INFEASIBLE
    assert enumerate_milp(build_deterministic(grid, ops, 1)).status == INFEASIBLE


def test_case14_matches_enumeration():
    grid = build_grid(read_case("case14"))
    ops = build_operators(grid)
    for L_o in (1, 2):
        prog = build_deterministic(grid, ops, L_o)
        a, e = solve_milp(prog), enumerate_milp(prog)
        assert abs(a.objective - e.objective) <= 1e-6 * abs(e.objective)
        assert a.open_lines == e.open_lines
        assert len(a.open_lines) <= L_o


def test_enumeration_counts():
    grid = build_grid(read_case("case14"))
    ops = build_operators(grid)
    assert enumerate_milp(build_deterministic(grid, ops, 0)).lp_solves == 1
    assert enumerate_milp(build_deterministic(grid, ops, 1), n_lines=20).lp_solves == 21
    with pytest.raises(EnumerationTooLargeError):
        enumerate_milp(build_deterministic(grid, ops, 20))


def test_bound_trace_and_integrality():
    _, grid, ops = random_case(3)
    prog = build_deterministic(grid, ops, 2)
    rep = solve_milp(prog)
    assert rep.status == OPTIMAL
    trace = np.array(rep.bound_trace)
    assert np.all(np.diff(trace) >= -1e-9)
    z = rep["z"]
    assert np.max(np.abs(z - np.round(z))) <= 1e-9
    relax = solve_lp(prog.relaxed())
    assert rep.objective >= relax.objective - 1e-8
    assert rep.objective == pytest.approx(prog.objective(rep.x), rel=1e-9)


def test_highs_backend_agrees():
    grid = build_grid(read_case("case14"))
    ops = build_operators(grid)
    prog = build_deterministic(grid, ops, 2)
    a, b = solve_milp(prog), solve_milp(prog, backend="highs")
    assert abs(a.objective - b.objective) <= 1e-6 * abs(a.objective)
    assert a.open_lines == b.open_lines


def test_node_limit_keeps_incumbent():
    grid = build_grid(read_case("case14"))
    ops = build_operators(grid)
    rep = solve_milp(build_deterministic(grid, ops, 3), node_limit=2)
    assert rep.status in (NODE_LIMIT, OPTIMAL)


def test_tie_break_prefers_fewer_then_lexicographic():
    assert open_key([1, 1, 0]) < open_key([0, 0, 1])
    assert open_key([0, 1, 1]) < open_key([1, 0, 1])


def test_ties_resolve_to_fewest_open():
    # two identical uncongested lines: opening either changes nothing
    grid, ops = setup(two_bus_doc(lines=2, load=50.0))
    rep = solve_milp(build_deterministic(grid, ops, 1))
    assert rep.open_lines == []


def test_tiny_knapsack():
    # max 5a + 4b + 3c s.t. 2a + 3b + c <= 5, binaries
    b = ProgramBuilder("knap")
    z = b.add_vars("z", (3,), lb=0.0, ub=1.0, binary=True)
    b.add_rows("cap", [(np.array([[2.0, 3.0, 1.0]]), z)], "<=", 5.0)
    b.add_objective(z, [-5.0, -4.0, -3.0])
    prog = b.build()
    rep = solve_milp(prog, reclose=False)
    assert np.isclose(rep.objective, -9.0) and np.allclose(rep["z"], [1, 1, 0])
    assert np.isclose(enumerate_milp(prog, max_open=3).objective, -9.0)
