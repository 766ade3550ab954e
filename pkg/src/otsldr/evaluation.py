"""Solve drivers, out-of-sample tests, bound gaps and the scaling benchmark."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT
from .errors import OTSError
from .formulation import (
    FirstStage,
    _check_scenarios,
    build_deterministic,
    build_dual_ldr,
    build_primal_ldr,
    build_saa,
    build_vertex_program,
    deterministic_row_count,
    scenario_block_rows,
)
from .network import Grid, NetworkOperators
from .program import ProgramBuilder
from .solver import solve_milp
from .solver.lp import HighsSession
from .solver.report import INFEASIBLE, OPTIMAL, SolveReport
from .uncertainty import MAX_VERTEX_DIM, UncertaintyPolytope, sample

log = logging.getLogger(__name__)

METHODS = ("det", "saa", "ldr", "dual-ldr", "oracle")
# per-unit balance residual above which a scenario counts as infeasible
RECOURSE_TOL = 1e-6
GAP_EPS = 1e-9
# "auto" runs the vertex oracle only when its recourse rows stay below this
ORACLE_ROW_LIMIT = 20_000


class SolverFailure(OTSError):
    """A program that should have an optimum came back without one."""


# ---------------------------------------------------------------------------
# second stage with a fixed first stage


class RecourseLP:
    """Feasibility LP in ``(theta', f')`` for a fixed first stage.

    The balance rows carry elastic slacks, so the optimum is the smallest
    total balance mismatch (p.u.) achievable at a realization; bounds and
    Big-M rows are hard.  Only the balance right-hand side depends on ``xi``,
    so one HiGHS model is reused across realizations.
    """

    def __init__(self, grid: Grid, ops: NetworkOperators, first: FirstStage, config=None):
        self.grid, self.ops, self.first = grid, ops, first
        N, L = grid.N, grid.L
        z = first.z
        th_lo, th_hi = grid.theta_min.copy(), grid.theta_max.copy()
        th_lo[grid.ref] = th_hi[grid.ref] = 0.0
        b = ProgramBuilder("recourse")
        thp = b.add_vars("theta_p", (N,), lb=th_lo - first.theta, ub=th_hi - first.theta)
        lo_f, hi_f = grid.f_min * z - first.f, grid.f_max * z - first.f
        fp = b.add_vars("f_p", (L,), lb=np.minimum(lo_f, hi_f), ub=np.maximum(lo_f, hi_f))
        sp_ = b.add_vars("slack_plus", (N,), lb=0.0)
        sn_ = b.add_vars("slack_minus", (N,), lb=0.0)
        I_N, I_L = np.ones(N), np.ones(L)
        b.add_rows("balance", [(ops.A, fp), (I_N, sp_), (-I_N, sn_)], "=", np.zeros(N))
        flow = ops.K_mat @ first.theta - first.f
        slack_M = ops.M_diag * (1 - z)
        b.add_rows("bigm_lo", [(ops.K_mat, thp), (-I_L, fp)], ">=", -slack_M - flow)
        b.add_rows("bigm_hi", [(ops.K_mat, thp), (-I_L, fp)], "<=", slack_M - flow)
        b.add_objective(sp_, 1.0)
        b.add_objective(sn_, 1.0)
        self.prog = b.build()
        self.session = HighsSession(self.prog, config)
        self._rows = self.prog.row_bounds()
        self._bal = self.prog.row_blocks["balance"].indices()
        self._base_rhs = (-grid.load + ops.F @ grid.wind_nominal + ops.C_gen @ first.g
                          - ops.A @ first.f)

    def _first_stage_violation(self, sigma):
        grid, first = self.grid, self.first
        gp = first.gamma * sigma
        parts = (grid.r_minus - gp, gp - grid.r_plus,
                 grid.g_min - (first.g + gp), first.g + gp - grid.g_max)
        return float(max(np.max(p, initial=0.0) for p in parts))

    def solve(self, xi):
        """Return ``(violation, theta', f')``; violation is ``inf`` if no recourse exists."""
        xi = np.asarray(xi, dtype=float)
        sigma = float(np.sum(xi))
        rhs = self._base_rhs + self.ops.F @ xi + sigma * (self.ops.C_gen @ self.first.gamma)
        lo, hi = self._rows[0].copy(), self._rows[1].copy()
        lo[self._bal] = hi[self._bal] = rhs
        rep = self.session.solve(row_lo=lo, row_hi=hi)
        first_viol = self._first_stage_violation(sigma)
        if rep.status != OPTIMAL:
            return np.inf, None, None
        vals = rep.x
        thp = vals[self.prog.var_blocks["theta_p"].indices()]
        fp = vals[self.prog.var_blocks["f_p"].indices()]
        return max(first_viol, float(rep.objective)), thp, fp

    def violation(self, xi):
        return self.solve(xi)[0]


# ---------------------------------------------------------------------------
# solve drivers


def solve_saa(grid: Grid, ops: NetworkOperators, max_open, poly: UncertaintyPolytope, scenarios,
              config=None, backend=None, strategy="generate", batch=10) -> SolveReport:
    """Solve the sample-average program over ``scenarios``.

    ``strategy="full"`` builds and solves the monolithic program.  The default
    ``"generate"`` solves the same program by scenario generation: the MILP is
    solved over a growing subset (objective still uses the mean over all
    scenarios), every scenario is then checked with :class:`RecourseLP`, and
    the most violated ones are added.  The loop stops when the subset optimum
    admits a recourse at every scenario, at which point it is optimal for the
    full program as well.
    """
    cfg = config or DEFAULT
    max_open = grid.max_open if max_open is None else max_open
    scenarios = _check_scenarios(poly, scenarios)
    S = len(scenarios)
    if S == 0:
        raise ValueError("SAA needs at least one scenario")
    mean_total = float(scenarios.sum(axis=1).mean())
    t0 = time.perf_counter()
    full_rows = deterministic_row_count(grid) + S * scenario_block_rows(grid)
    if strategy == "full":
        prog = build_saa(grid, ops, max_open, poly, scenarios)
        rep = solve_milp(prog, cfg, backend=backend)
        rep.metadata.update(prog.metadata, active_scenarios=S, rounds=1)
        rep.wall_seconds = time.perf_counter() - t0
        return rep
    if strategy != "generate":
        raise ValueError(f"unknown SAA strategy {strategy!r}")

    sums = scenarios.sum(axis=1)
    seeds = [int(np.argmin(sums)), int(np.argmax(sums))]
    for k in range(poly.K):
        seeds += [int(np.argmin(scenarios[:, k])), int(np.argmax(scenarios[:, k]))]
    active = sorted(set(seeds))
    rounds = lp_solves = nodes = 0
    while True:
        rounds += 1
        prog = build_saa(grid, ops, max_open, poly, scenarios[active], mean_total=mean_total)
        rep = solve_milp(prog, cfg, backend=backend)
        lp_solves += rep.lp_solves
        nodes += rep.nodes
        if rep.status != OPTIMAL:
            break
        checker = RecourseLP(grid, ops, FirstStage.from_report(rep), cfg)
        viol = np.array([checker.violation(xi) for xi in scenarios])
        lp_solves += S
        viol[active] = 0.0
        order = np.argsort(-viol, kind="stable")
        add = [int(s) for s in order[:batch] if viol[s] > RECOURSE_TOL]
        log.debug("SAA round %d: %d active, %d violated", rounds, len(active),
                  int(np.sum(viol > RECOURSE_TOL)))
        if not add:
            break
        active = sorted(set(active) | set(add))
    rep.metadata.update(prog.metadata, S=S, n_rows=full_rows,
                        n_vars=prog.metadata["n_vars"] + (S - len(active)) * (grid.N + grid.L),
                        active_scenarios=len(active), rounds=rounds)
    rep.lp_solves, rep.nodes = lp_solves, nodes
    rep.wall_seconds = time.perf_counter() - t0
    return rep


def build_program(method, grid, ops, max_open, poly=None, scenarios=None, **kw):
    if method == "det":
        return build_deterministic(grid, ops, max_open)
    if method == "saa":
        return build_saa(grid, ops, max_open, poly, scenarios)
    if method == "ldr":
        return build_primal_ldr(grid, ops, max_open, poly, **kw)
    if method == "dual-ldr":
        return build_dual_ldr(grid, ops, max_open, poly, **kw)
    if method == "oracle":
        return build_vertex_program(grid, ops, max_open, poly)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def solve_method(method, grid: Grid, ops: NetworkOperators, max_open=None, poly=None,
                 scenarios=None, config=None, backend=None, **kw) -> SolveReport:
    """Build and solve one method; program sizes land in ``report.metadata``."""
    max_open = grid.max_open if max_open is None else max_open
    if method == "saa":
        return solve_saa(grid, ops, max_open, poly, scenarios, config=config, backend=backend,
                         **kw)
    t0 = time.perf_counter()
    prog = build_program(method, grid, ops, max_open, poly, scenarios, **kw)
    rep = solve_milp(prog, config, backend=backend)
    rep.metadata.update(prog.metadata)
    rep.wall_seconds = time.perf_counter() - t0
    return rep


def exact_vertex_oracle(grid: Grid, ops: NetworkOperators, max_open, poly: UncertaintyPolytope,
                        config=None, backend=None) -> SolveReport:
    """Exact two-stage optimum over a box support, by recourse at all ``2^K`` vertices.

    For a fixed first stage every constraint is affine in xi and the recourse
    is free per realization, so the feasible realizations form a convex set;
    covering the vertices covers the box.
    """
    return solve_method("oracle", grid, ops, max_open, poly, config=config, backend=backend)


def require_optimal(rep, what):
    if rep.status != OPTIMAL:
        raise SolverFailure(f"{what}: {rep.status}")
    return rep


# ---------------------------------------------------------------------------
# out-of-sample


@dataclass
class OutOfSample:
    mean_cost: float
    infeasible: int
    n: int
    costs: np.ndarray = field(repr=False)
    feasible: np.ndarray = field(repr=False)


def out_of_sample(first: FirstStage, grid: Grid, ops: NetworkOperators, scenarios,
                  config=None) -> OutOfSample:
    """Re-solve the second stage at fresh realizations with the first stage fixed.

    Cost per realization is ``c^T g + q^T gamma (1^T xi)`` in $/h.  Scenarios
    without a feasible recourse are counted and left out of the mean.
    """
    scenarios = np.asarray(scenarios, dtype=float).reshape(len(scenarios), grid.K)
    lp = RecourseLP(grid, ops, first, config)
    sums = scenarios.sum(axis=1)
    costs = grid.base_mva * (grid.c @ first.g + (grid.q @ first.gamma) * sums)
    feasible = np.array([lp.violation(xi) <= RECOURSE_TOL for xi in scenarios], dtype=bool)
    mean = float(costs[feasible].mean()) if feasible.any() else np.nan
    return OutOfSample(mean_cost=mean, infeasible=int((~feasible).sum()), n=len(scenarios),
                       costs=costs, feasible=feasible)


# ---------------------------------------------------------------------------
# tables


COLUMNS = ("method", "L_o", "K", "S", "objective", "out_of_sample_cost",
           "infeasible_scenario_count", "bound_gap_percent", "n_rows", "n_vars",
           "wall_seconds", "open_lines")
VOLATILE = ("wall_seconds",)


@dataclass
class EvaluationTable:
    rows: list = field(default_factory=list)

    def add(self, **values):
        unknown = set(values) - set(COLUMNS)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append({c: values.get(c) for c in COLUMNS})
        return self.rows[-1]

    def add_report(self, method, rep: SolveReport, **extra):
        meta = rep.metadata
        return self.add(method=method, L_o=meta.get("max_open"), K=meta.get("K"),
                        S=meta.get("S"), objective=rep.objective, n_rows=meta.get("n_rows"),
                        n_vars=meta.get("n_vars"), wall_seconds=rep.wall_seconds,
                        open_lines=rep.open_lines, **extra)

    def column(self, name):
        return [r[name] for r in self.rows]

    def __len__(self):
        return len(self.rows)


def gap_percent(ub, lb):
    return 100.0 * (ub - lb) / max(abs(lb), GAP_EPS)


def bound_gap(grid: Grid, ops: NetworkOperators, max_open, poly: UncertaintyPolytope,
              config=None, backend=None, oracle="auto") -> dict:
    """Primal-LDR upper bound, dual-LDR lower bound, and the exact value when affordable."""
    out = {"L_o": max_open}
    # a zero-width support is the deterministic limit; coefficient splitting stays sufficient
    flat = {"allow_degenerate": True} if poly.is_degenerate_box() else {}
    ub = solve_method("ldr", grid, ops, max_open, poly, config=config, backend=backend, **flat)
    lb = solve_method("dual-ldr", grid, ops, max_open, poly, config=config, backend=backend)
    out.update(UB=ub.objective, LB=lb.objective, ub_report=ub, lb_report=lb,
               ub_seconds=ub.wall_seconds, lb_seconds=lb.wall_seconds)
    if ub.status == OPTIMAL and lb.status == OPTIMAL:
        out["gap_percent"] = gap_percent(ub.objective, lb.objective)
    else:
        out["gap_percent"] = np.nan
    use_oracle = oracle is True
    if oracle == "auto" and poly.box is not None and poly.K <= MAX_VERTEX_DIM:
        use_oracle = 2 ** poly.K * scenario_block_rows(grid) <= ORACLE_ROW_LIMIT
    out["exact"] = np.nan
    if use_oracle:
        ex = solve_method("oracle", grid, ops, max_open, poly, config=config, backend=backend)
        out["exact_report"] = ex
        if ex.status == OPTIMAL:
            out["exact"] = ex.objective
    return out


def scaling_benchmark(grid: Grid, ops: NetworkOperators, max_open, poly: UncertaintyPolytope,
                      S_list, seed=0, config=None, backend=None, solve=True) -> EvaluationTable:
    """SAA size and time against the number of scenarios, plus one LDR row.

    SAA rows use the monolithic program, since its growth is what is being
    measured.  Row counts are checked to be exactly affine in ``S``.
    """
    S_list = [int(s) for s in S_list]
    if S_list != sorted(S_list) or not S_list or S_list[0] < 1:
        raise ValueError("S_list must be ascending positive integers")
    table = EvaluationTable()
    base, block = deterministic_row_count(grid), scenario_block_rows(grid)
    for S in S_list:
        xi = sample(poly, S, seed)
        t0 = time.perf_counter()
        prog = build_saa(grid, ops, max_open, poly, xi)
        if prog.n_rows != base + S * block:
            raise AssertionError(f"SAA rows {prog.n_rows} != {base} + {S}*{block}")
        rep = solve_milp(prog, config, backend=backend) if solve else SolveReport(status=OPTIMAL)
        rep.metadata.update(prog.metadata)
        rep.wall_seconds = time.perf_counter() - t0
        table.add_report("saa", rep)
    t0 = time.perf_counter()
    prog = build_primal_ldr(grid, ops, max_open, poly)
    rep = solve_milp(prog, config, backend=backend) if solve else SolveReport(status=OPTIMAL)
    rep.metadata.update(prog.metadata)
    rep.wall_seconds = time.perf_counter() - t0
    table.add_report("ldr", rep)
    return table


def evaluate_methods(grid, ops, max_open, poly, methods, samples, oos, seed=0,
                     config=None, backend=None) -> EvaluationTable:
    """Solve each method and price its first stage on one shared fresh sample set."""
    scen = sample(poly, samples, seed) if "saa" in methods else None
    fresh = sample(poly, oos, seed + 1)
    table = EvaluationTable()
    for m in methods:
        rep = solve_method(m, grid, ops, max_open, poly, scen, config=config, backend=backend)
        if rep.status == INFEASIBLE or rep.x is None:
            table.add_report(m, rep)
            continue
        res = out_of_sample(FirstStage.from_report(rep), grid, ops, fresh, config)
        table.add_report(m, rep, out_of_sample_cost=res.mean_cost,
                         infeasible_scenario_count=res.infeasible)
    return table
