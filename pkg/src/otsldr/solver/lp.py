"""LP front-end: dispatches a continuous MathProgram to the simplex or HiGHS."""
from __future__ import annotations

import time

import highspy
import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from ..config import DEFAULT
from ..errors import NumericalError
from ..program import MathProgram
from .report import INFEASIBLE, ITER_LIMIT, OPTIMAL, UNBOUNDED, SolveReport, attach_values
from .simplex import simplex

def pick_backend(prog, config, backend=None):
    backend = backend or config.lp_backend
    if backend == "auto":
        small = prog.n_rows <= config.dense_row_limit and prog.n_vars <= 4 * config.dense_row_limit
        return "simplex" if small else "highs"
    if backend not in ("simplex", "highs"):
        raise ValueError(f"unknown LP backend {backend!r}")
    return backend


def solve_lp(prog: MathProgram, config=None, backend=None, basis=None, lb=None, ub=None,
             allow_binary=False, certificate=True) -> SolveReport:
    """Solve the continuous program ``prog`` (optionally with overriding bounds).

    Duals are reported as sensitivities d(objective)/d(rhs): non-positive for
    active ``<=`` rows and non-negative for active ``>=`` rows.
    """
    cfg = config or DEFAULT
    if prog.n_binary and not allow_binary:
        raise ValueError("solve_lp needs a program without binaries; use solve_milp")
    lb = prog.lb if lb is None else lb
    ub = prog.ub if ub is None else ub
    backend = pick_backend(prog, cfg, backend)
    t0 = time.perf_counter()
    row_lo, row_hi = prog.row_bounds()
    if backend == "simplex":
        res = simplex(prog.c, prog.A, row_lo, row_hi, lb, ub, cfg, basis=basis)
        rep = SolveReport(
            status=res.status,
            objective=res.objective + prog.c0 if res.status == OPTIMAL else np.nan,
            x=res.x,
            row_duals=res.row_duals,
            reduced_costs=res.reduced_costs,
            iterations=res.iterations,
            basis=res.basis,
            farkas=res.farkas,
            backend="simplex",
            lp_solves=1,
        )
    else:
        rep = _solve_highs(prog, lb, ub, cfg, certificate)
    rep.wall_seconds = time.perf_counter() - t0
    return attach_values(rep, prog)


class HighsSession:
    """A HiGHS model kept alive across solves that only change bounds.

    Branch-and-bound and enumeration re-solve the same matrix many times;
    passing the model once and warm-starting from a stored basis is far
    cheaper than rebuilding it per node.
    """

    def __init__(self, prog: MathProgram, config=None):
        cfg = config or DEFAULT
        self.prog = prog
        self.h = highspy.Highs()
        h = self.h
        h.setOptionValue("output_flag", False)
        h.setOptionValue("primal_feasibility_tolerance", min(cfg.feas_tol, 1e-7))
        h.setOptionValue("dual_feasibility_tolerance", min(cfg.opt_tol, 1e-7))
        h.setOptionValue("simplex_iteration_limit", cfg.max_iter * 10)
        h.setOptionValue("solver", "simplex")
        h.setOptionValue("presolve", "off")
        lp = highspy.HighsLp()
        lp.num_col_ = prog.n_vars
        lp.num_row_ = prog.n_rows
        lp.col_cost_ = np.asarray(prog.c, dtype=float)
        lp.col_lower_ = _inf(prog.lb)
        lp.col_upper_ = _inf(prog.ub)
        lo, hi = prog.row_bounds()
        lp.row_lower_ = _inf(lo)
        lp.row_upper_ = _inf(hi)
        A = sp.csc_matrix(prog.A)
        A.sort_indices()
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = A.indptr.astype(np.int32)
        lp.a_matrix_.index_ = A.indices.astype(np.int32)
        lp.a_matrix_.value_ = A.data.astype(float)
        h.passModel(lp)
        self._all = np.arange(prog.n_vars, dtype=np.int32)

    def solve(self, lb=None, ub=None, basis=None, row_lo=None, row_hi=None):
        prog, h = self.prog, self.h
        lb = prog.lb if lb is None else lb
        ub = prog.ub if ub is None else ub
        if np.any(lb > ub):
            return SolveReport(status=INFEASIBLE, backend="highs", lp_solves=1)
        h.changeColsBounds(prog.n_vars, self._all, _inf(lb), _inf(ub))
        if row_lo is not None:
            h.changeRowsBounds(prog.n_rows, np.arange(prog.n_rows, dtype=np.int32),
                               _inf(row_lo), _inf(row_hi))
        if basis is not None:
            h.setBasis(basis)
        h.run()
        ms = h.getModelStatus()
        if ms in _RETRY:
            # a stale warm start can stall the simplex; retry cold, then with presolve
            h.clearSolver()
            h.run()
            ms = h.getModelStatus()
            if ms in _RETRY:
                # as a last resort let HiGHS presolve the model before the simplex
                h.clearSolver()
                h.setOptionValue("presolve", "on")
                h.run()
                h.setOptionValue("presolve", "off")
                ms = h.getModelStatus()
            if ms in _RETRY:
                ms = (highspy.HighsModelStatus.kInfeasible if farkas_lp(prog, lb, ub) is not None
                      else ms)
        info = h.getInfo()
        rep = SolveReport(status=OPTIMAL, backend="highs", lp_solves=1,
                          iterations=int(info.simplex_iteration_count))
        if ms == highspy.HighsModelStatus.kOptimal:
            sol = h.getSolution()
            rep.x = np.array(sol.col_value, dtype=float)
            rep.objective = float(prog.c @ rep.x) + prog.c0
            rep.row_duals = np.array(sol.row_dual, dtype=float)
            rep.reduced_costs = np.array(sol.col_dual, dtype=float)
            rep.basis = h.getBasis()
        elif ms == highspy.HighsModelStatus.kInfeasible:
            rep.status = INFEASIBLE
        elif ms == highspy.HighsModelStatus.kUnbounded:
            rep.status = UNBOUNDED
            rep.objective = -np.inf
        elif ms == highspy.HighsModelStatus.kUnboundedOrInfeasible:
            # settle the ambiguity with a certificate search
            rep.status = INFEASIBLE if farkas_lp(prog, lb, ub) is not None else UNBOUNDED
            if rep.status == UNBOUNDED:
                rep.objective = -np.inf
        elif ms == highspy.HighsModelStatus.kIterationLimit:
            rep.status = ITER_LIMIT
        else:
            raise NumericalError(f"HiGHS: {h.modelStatusToString(ms)}")
        return rep


_RETRY = (highspy.HighsModelStatus.kUnknown, highspy.HighsModelStatus.kSolveError,
          highspy.HighsModelStatus.kNotset)


def _inf(v):
    return np.clip(np.asarray(v, dtype=float), -highspy.kHighsInf, highspy.kHighsInf)


def _solve_highs(prog, lb, ub, cfg, certificate):
    rep = HighsSession(prog, cfg).solve(lb, ub)
    if rep.status == INFEASIBLE and certificate:
        cert = farkas_lp(prog, lb, ub)
        if cert is None:
            rep.status = UNBOUNDED
            rep.objective = -np.inf
        else:
            rep.farkas = cert
    return rep


def farkas_lp(prog, lb=None, ub=None):
    """Search an infeasibility certificate by LP; ``None`` if the program is feasible.

    Weights multiply ``a_r x <= hi_r``, ``-a_r x <= -lo_r``, ``x <= ub``,
    ``-x <= -lb`` (finite sides only); they must cancel and sum to <= -1.
    """
    lb = prog.lb if lb is None else lb
    ub = prog.ub if ub is None else ub
    lo, hi = prog.row_bounds()
    m, n = prog.n_rows, prog.n_vars
    A = prog.A.tocsc()
    blocks = [(A.T, hi, "row_upper"), (-A.T, lo, "row_lower"),
              (sp.identity(n, format="csc"), ub, "col_upper"),
              (-sp.identity(n, format="csc"), lb, "col_lower")]
    cols, costs, keys, sizes = [], [], [], []
    for mat, side, key in blocks:
        finite = np.isfinite(side)
        cols.append(sp.csc_matrix(mat)[:, finite])
        costs.append(side[finite] * (-1 if key.endswith("lower") else 1))
        keys.append((key, np.flatnonzero(finite), side.size))
    G = sp.hstack(cols).tocsr()
    h = np.concatenate(costs)
    if h.size == 0:
        return None
    res = linprog(np.ones(h.size), A_ub=h.reshape(1, -1), b_ub=[-1.0], A_eq=G,
                  b_eq=np.zeros(n), bounds=(0, None), method="highs")
    if res.status != 0:
        return None
    cert, pos = {}, 0
    for key, idx, size in keys:
        w = np.zeros(size)
        w[idx] = res.x[pos:pos + idx.size]
        pos += idx.size
        cert[key] = w
    return cert
