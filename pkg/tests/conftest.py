"""Session fixtures for the pinned cases and the acceptance summary lines."""
import contextlib
import time

import pytest

from otsldr.cli import read_case
from otsldr.evaluation import solve_method
from otsldr.network import build_grid, build_operators
from otsldr.uncertainty import box_support, sample

BUDGETS = (1, 2, 3, 4)
SAA_SAMPLES, SAA_SEED = 500, 0

_results = {}


@contextlib.contextmanager
def criterion(number, title):
    """Record a pass/fail line for acceptance criterion ``number``.

    The body may set ``info["detail"]`` to explain the outcome.
    """
    info = {"detail": ""}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException as exc:
        detail = info["detail"] or f"{type(exc).__name__}: {str(exc).splitlines()[0][:160]}"
        _results[number] = ("FAIL", title, detail, time.perf_counter() - t0)
        print(f"\ncriterion {number} FAIL: {title}: {detail}")
        raise
    _results[number] = ("PASS", title, info["detail"], time.perf_counter() - t0)
    print(f"\ncriterion {number} PASS: {title}: {info['detail']}")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_results):
        status, title, detail, secs = _results[n]
        tr.write_line(f"criterion {n} {status}: {title} ({secs:.1f} s) {detail}")


@pytest.fixture(scope="session")
def case14():
    grid = build_grid(read_case("case14"))
    return grid, build_operators(grid), box_support(grid.xi_min, grid.xi_max)


@pytest.fixture(scope="session")
def ldr14(case14):
    """Primal-LDR solves of the pinned 14-bus case for every budget."""
    grid, ops, poly = case14
    return {L_o: solve_method("ldr", grid, ops, L_o, poly) for L_o in BUDGETS}


@pytest.fixture(scope="session")
def saa14(case14):
    """SAA solves of the pinned 14-bus case (S=500, seed 0) for every budget."""
    grid, ops, poly = case14
    xi = sample(poly, SAA_SAMPLES, SAA_SEED)
    return {L_o: solve_method("saa", grid, ops, L_o, poly, xi) for L_o in BUDGETS}


@pytest.fixture(scope="session")
def case118():
    grid = build_grid(read_case("case118"))
    return grid, build_operators(grid), box_support(grid.xi_min, grid.xi_max)
