import numpy as np
import pytest

from otsldr.cli import read_case
from otsldr.evaluation import (
    EvaluationTable,
    RecourseLP,
    bound_gap,
    evaluate_methods,
    gap_percent,
    out_of_sample,
    scaling_benchmark,
    solve_method,
    solve_saa,
)
from otsldr.formulation import AffinePolicy, FirstStage, deterministic_row_count, scenario_block_rows
from otsldr.network import build_grid, build_operators
from otsldr.uncertainty import box_support, sample

from helpers import random_case


@pytest.fixture(scope="module")
def case14():
    grid = build_grid(read_case("case14"))
    return grid, build_operators(grid), box_support(grid.xi_min, grid.xi_max)


@pytest.fixture(scope="module")
def ldr14(case14):
    grid, ops, poly = case14
    return solve_method("ldr", grid, ops, 1, poly)


def test_out_of_sample_cost_identity(case14, ldr14):
    grid, ops, poly = case14
    first = FirstStage.from_report(ldr14)
    xi = sample(poly, 400, 11)
    res = out_of_sample(first, grid, ops, xi)
    assert res.infeasible == 0 and res.n == 400
    expected = grid.base_mva * (grid.c @ first.g + (grid.q @ first.gamma) * xi.sum(axis=1))
    assert np.allclose(res.costs, expected, rtol=1e-12, atol=0)
    assert res.mean_cost == pytest.approx(expected.mean(), rel=1e-12)
    # with mu = 0 the in-sample objective is the mean cost in the limit
    spread = abs(grid.base_mva * grid.q @ first.gamma) * np.sqrt(np.sum(
        (grid.xi_max - grid.xi_min) ** 2 / 12))
    assert abs(res.mean_cost - ldr14.objective) <= 4 * spread / np.sqrt(400) + 1e-6


def test_recourse_matches_affine_policy(case14, ldr14):
    grid, ops, poly = case14
    first, policy = FirstStage.from_report(ldr14), AffinePolicy.from_report(ldr14)
    lp = RecourseLP(grid, ops, first)
    for xi in sample(poly, 20, 3):
        assert lp.violation(xi) <= 1e-7
    # an infeasible realization is reported as such, not raised
    too_much = 50 * grid.xi_max
    assert lp.violation(too_much) > 1e-6


def test_zero_width_out_of_sample_equals_in_sample():
    _, grid, ops = random_case(4)
    flat = box_support(np.zeros(grid.K), np.zeros(grid.K), allow_degenerate=True)
    for method, kw in (("det", {}), ("ldr", {"allow_degenerate": True})):
        rep = solve_method(method, grid, ops, 1, flat, **kw)
        res = out_of_sample(FirstStage.from_report(rep), grid, ops, sample(flat, 30, 0))
        assert res.infeasible == 0 and res.mean_cost == pytest.approx(rep.objective, abs=1e-9)


@pytest.mark.parametrize("seed", [0, 6])
def test_scenario_generation_matches_monolithic_saa(seed):
    _, grid, ops = random_case(seed, k=3)
    poly = box_support(grid.xi_min, grid.xi_max)
    xi = sample(poly, 60, seed)
    full = solve_saa(grid, ops, 2, poly, xi, strategy="full")
    gen = solve_saa(grid, ops, 2, poly, xi)
    assert abs(full.objective - gen.objective) <= 1e-6 * max(1.0, abs(full.objective))
    assert full.metadata["n_rows"] == gen.metadata["n_rows"]


def test_scenario_generation_case14(case14):
    grid, ops, poly = case14
    xi = sample(poly, 40, 8)
    full = solve_saa(grid, ops, 1, poly, xi, strategy="full")
    gen = solve_saa(grid, ops, 1, poly, xi)
    assert abs(full.objective - gen.objective) <= 1e-6 * full.objective
    assert full.open_lines == gen.open_lines


def test_gap_percent():
    assert gap_percent(101.0, 100.0) == pytest.approx(1.0)
    assert gap_percent(0.0, 0.0) == 0.0


def test_bound_gap_collapse():
    _, grid, ops = random_case(2)
    flat = box_support(np.zeros(grid.K), np.zeros(grid.K), allow_degenerate=True)
    res = bound_gap(grid, ops, 1, flat, oracle=True)
    assert abs(res["gap_percent"]) <= 1e-6
    assert res["exact"] == pytest.approx(res["UB"], rel=1e-9)


def test_bound_gap_sandwich_case14(case14):
    grid, ops, poly = case14
    res = bound_gap(grid, ops, 1, poly)
    assert np.isfinite(res["gap_percent"]) and res["gap_percent"] >= -1e-4
    assert res["LB"] - 1e-6 <= res["exact"] <= res["UB"] + 1e-6


def test_scaling_rows_affine(case14):
    grid, ops, poly = case14
    base, block = deterministic_row_count(grid), scenario_block_rows(grid)
    table = scaling_benchmark(grid, ops, 1, poly, [1], solve=False)
    assert table.rows[0]["n_rows"] == base + block
    table = scaling_benchmark(grid, ops, 1, poly, [10, 50, 100], solve=False)
    saa = [(r["S"], r["n_rows"]) for r in table.rows if r["method"] == "saa"]
    (s0, r0), (s1, r1), (s2, r2) = saa
    assert (r1 - r0) * (s2 - s1) == (r2 - r1) * (s1 - s0)
    with pytest.raises(ValueError):
        scaling_benchmark(grid, ops, 1, poly, [50, 10], solve=False)


def test_table_columns():
    table = EvaluationTable()
    with pytest.raises(KeyError):
        table.add(bogus=1)
    table.add(method="det", objective=1.0)
    assert len(table) == 1 and table.column("objective") == [1.0]


def test_evaluate_methods_consistency():
    _, grid, ops = random_case(1, k=2)
    poly = box_support(grid.xi_min, grid.xi_max)
    a = evaluate_methods(grid, ops, 2, poly, ["saa", "ldr"], 30, 100, seed=5)
    b = evaluate_methods(grid, ops, 2, poly, ["saa", "ldr"], 30, 100, seed=5)
    assert a.column("objective") == b.column("objective")
    assert a.column("out_of_sample_cost") == b.column("out_of_sample_cost")
    for row in a.rows:
        assert len(row["open_lines"]) <= 2
    ldr = [r for r in a.rows if r["method"] == "ldr"][0]
    assert ldr["infeasible_scenario_count"] == 0
