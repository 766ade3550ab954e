"""Branch-and-bound over the binary block, plus an enumeration oracle."""
from __future__ import annotations

import heapq
import itertools
import math
import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from ..config import DEFAULT
from ..errors import EnumerationTooLargeError
from ..program import MathProgram
from .lp import HighsSession, pick_backend, solve_lp
from .report import INFEASIBLE, NODE_LIMIT, OPTIMAL, UNBOUNDED, SolveReport, attach_values

ENUMERATION_LIMIT = 10**6


def open_key(z):
    """Tie-break key among equal-cost solutions: fewer open lines, then lexicographic."""
    opened = tuple(int(i) for i in np.flatnonzero(np.asarray(z) < 0.5))
    return (len(opened), opened)


def _better(obj, key, best_obj, best_key, tol):
    if best_obj is None or obj < best_obj - tol:
        return True
    return abs(obj - best_obj) <= tol and key < best_key


def solve_milp(prog: MathProgram, config=None, lp_backend=None, backend=None,
               node_limit=None, reclose=True) -> SolveReport:
    """Minimize ``prog`` with binaries, by best-first branch-and-bound.

    Branching is on the most fractional binary (lowest index on ties); child
    LPs are warm-started from the parent basis when the dense simplex is in
    use.  When ``reclose`` is set, open lines whose reclosure keeps the cost
    within the gap are closed again so equally cheap topologies resolve to the
    smallest open set.
    """
    cfg = config or DEFAULT
    backend = backend or cfg.milp_backend
    t0 = time.perf_counter()
    if backend == "highs":
        rep = _solve_highs_milp(prog, cfg)
    elif backend == "bnb":
        rep = _branch_and_bound(prog, cfg, lp_backend, node_limit or cfg.max_nodes)
    else:
        raise ValueError(f"unknown MILP backend {backend!r}")
    if reclose and rep.status in (OPTIMAL, NODE_LIMIT) and rep.x is not None:
        rep = _reclose(prog, rep, cfg, lp_backend)
    rep.wall_seconds = time.perf_counter() - t0
    return attach_values(rep, prog)


def _gap_tol(cfg, value):
    return cfg.mip_gap * max(1.0, abs(value))


def _branch_and_bound(prog, cfg, lp_backend, node_limit):
    bins = np.flatnonzero(prog.binary)
    relaxed = prog.relaxed()
    lp_backend = pick_backend(prog, cfg, lp_backend)
    node_lp = _node_solver(relaxed, cfg, lp_backend)
    lb0, ub0 = prog.lb.copy(), prog.ub.copy()
    lb0[bins] = np.ceil(lb0[bins] - cfg.int_tol)
    ub0[bins] = np.floor(ub0[bins] + cfg.int_tol)

    counter = itertools.count()
    heap = [(-np.inf, next(counter), lb0[bins], ub0[bins], None)]
    best_obj, best_key, best = None, None, None
    nodes = iters = lp_solves = 0
    trace = []
    status = OPTIMAL
    global_bound = -np.inf
    while heap:
        bound, _, zlo, zhi, basis = heapq.heappop(heap)
        if best_obj is not None and bound >= best_obj - _gap_tol(cfg, best_obj):
            global_bound = max(global_bound, bound)
            heap.clear()
            break
        if nodes >= node_limit:
            heapq.heappush(heap, (bound, next(counter), zlo, zhi, basis))
            status = NODE_LIMIT
            break
        nodes += 1
        global_bound = max(global_bound, bound)
        trace.append(bound)
        lb, ub = lb0.copy(), ub0.copy()
        lb[bins], ub[bins] = zlo, zhi
        rep = node_lp(lb, ub, basis)
        lp_solves += 1
        iters += rep.iterations
        if rep.status == INFEASIBLE:
            continue
        if rep.status == UNBOUNDED:
            return SolveReport(status=UNBOUNDED, objective=-np.inf, nodes=nodes,
                               iterations=iters, lp_solves=lp_solves, backend=f"bnb/{lp_backend}")
        if rep.status != OPTIMAL:
            status = rep.status
            break
        obj = max(rep.objective, bound)
        if best_obj is not None and obj >= best_obj - _gap_tol(cfg, best_obj):
            continue
        z = rep.x[bins]
        frac = np.abs(z - np.round(z))
        if frac.max(initial=0.0) <= cfg.int_tol:
            x = rep.x.copy()
            x[bins] = np.round(z)
            key = open_key(x[bins])
            if _better(rep.objective, key, best_obj, best_key, _gap_tol(cfg, rep.objective)):
                best_obj, best_key, best = rep.objective, key, x
            continue
        # most fractional: the one closest to 0.5; lowest index on ties
        k = int(np.argmax(frac - 1e-12 * np.arange(frac.size)))
        for val in (1.0, 0.0):
            clo, chi = zlo.copy(), zhi.copy()
            clo[k] = chi[k] = val
            heapq.heappush(heap, (obj, next(counter), clo, chi, rep.basis))

    if heap:
        global_bound = min(global_bound if status != NODE_LIMIT else np.inf,
                           min(item[0] for item in heap))
    out = SolveReport(status=status, nodes=nodes, iterations=iters, lp_solves=lp_solves,
                      backend=f"bnb/{lp_backend}", bound_trace=trace)
    if best is None:
        if status == OPTIMAL:
            out.status = INFEASIBLE
        return out
    out.x = best
    out.objective = prog.objective(best)
    out.bound = min(global_bound, out.objective) if np.isfinite(global_bound) else out.objective
    return out


def _solve_highs_milp(prog, cfg):
    lo, hi = prog.row_bounds()
    cons = [LinearConstraint(prog.A, lo, hi)] if prog.n_rows else []
    res = milp(prog.c, constraints=cons, integrality=prog.binary.astype(int),
               bounds=Bounds(prog.lb, prog.ub),
               options={"mip_rel_gap": cfg.mip_gap, "presolve": True})
    rep = SolveReport(status=OPTIMAL, backend="highs-milp")
    if res.status == 0:
        x = np.asarray(res.x, dtype=float)
        x[prog.binary] = np.round(x[prog.binary])
        # polish the continuous part with the binaries fixed
        lb, ub = prog.lb.copy(), prog.ub.copy()
        lb[prog.binary] = ub[prog.binary] = x[prog.binary]
        pol = solve_lp(prog.relaxed(), cfg, backend="highs", lb=lb, ub=ub, certificate=False)
        rep.x = pol.x if pol.status == OPTIMAL else x
        rep.objective = prog.objective(rep.x)
        rep.bound = float(getattr(res, "mip_dual_bound", rep.objective) or rep.objective)
        rep.nodes = int(getattr(res, "mip_node_count", 0) or 0)
    elif res.status == 2:
        rep.status = INFEASIBLE
    elif res.status == 3:
        rep.status = UNBOUNDED
    else:
        rep.status = NODE_LIMIT
    return rep


def _node_solver(relaxed, cfg, lp_backend):
    """Return ``f(lb, ub, basis) -> SolveReport`` for repeated bound-only re-solves."""
    if lp_backend == "highs":
        session = HighsSession(relaxed, cfg)
        return session.solve
    return lambda lb, ub, basis: solve_lp(relaxed, cfg, backend=lp_backend, basis=basis,
                                          lb=lb, ub=ub, certificate=False)


def _fixed_solve(prog, z_full, bins, node_lp, basis=None):
    lb, ub = prog.lb.copy(), prog.ub.copy()
    lb[bins] = ub[bins] = z_full
    return node_lp(lb, ub, basis)


def _reclose(prog, rep, cfg, lp_backend):
    bins = np.flatnonzero(prog.binary)
    z = np.round(rep.x[bins])
    best_obj = rep.objective
    x = rep.x
    node_lp = _node_solver(prog.relaxed(), cfg, pick_backend(prog, cfg, lp_backend))
    for k in np.flatnonzero(z < 0.5):
        if prog.ub[bins[k]] < 1:
            continue
        trial = z.copy()
        trial[k] = 1.0
        res = _fixed_solve(prog, trial, bins, node_lp)
        rep.lp_solves += 1
        if res.status == OPTIMAL and res.objective <= best_obj + _gap_tol(cfg, best_obj):
            z, x = trial, res.x
    if x is not rep.x:
        rep.x = x
        rep.objective = prog.objective(x)
    return rep


def enumeration_size(n_binary, max_open):
    return sum(math.comb(n_binary, k) for k in range(0, min(max_open, n_binary) + 1))


def enumerate_milp(prog: MathProgram, max_open=None, n_lines=None, config=None,
                   lp_backend=None) -> SolveReport:
    """Solve every LP with at most ``max_open`` binaries set to 0 and keep the best.

    Binaries whose upper bound is below 1 are held at 0 and count as open.
    """
    cfg = config or DEFAULT
    t0 = time.perf_counter()
    bins = np.flatnonzero(prog.binary)
    if max_open is None:
        max_open = prog.metadata.get("max_open", len(bins))
    if n_lines is not None and n_lines != len(bins):
        raise ValueError(f"program has {len(bins)} binaries, expected {n_lines}")
    free = [k for k in range(len(bins)) if prog.lb[bins[k]] < 1 <= prog.ub[bins[k]]]
    forced_open = [k for k in range(len(bins)) if prog.ub[bins[k]] < 1]
    budget = max_open - len(forced_open)
    total = enumeration_size(len(free), max(budget, 0)) if budget >= 0 else 0
    if total > ENUMERATION_LIMIT:
        raise EnumerationTooLargeError(f"{total} assignments exceed {ENUMERATION_LIMIT}")
    best_obj, best_key, best = None, None, None
    lp_solves = iters = 0
    basis = None
    node_lp = _node_solver(prog.relaxed(), cfg, pick_backend(prog, cfg, lp_backend))
    for r in range(0, max(budget, -1) + 1):
        for opened in itertools.combinations(free, r):
            z = np.ones(len(bins))
            z[forced_open] = 0.0
            z[list(opened)] = 0.0
            res = _fixed_solve(prog, z, bins, node_lp, basis=basis)
            lp_solves += 1
            iters += res.iterations
            if res.status != OPTIMAL:
                continue
            basis = res.basis
            key = open_key(z)
            if _better(res.objective, key, best_obj, best_key, _gap_tol(cfg, res.objective)):
                best_obj, best_key, best = res.objective, key, res.x
    rep = SolveReport(status=OPTIMAL if best is not None else INFEASIBLE, lp_solves=lp_solves,
                      nodes=lp_solves, iterations=iters, backend="enumerate")
    if best is not None:
        rep.x = best
        rep.objective = prog.objective(best)
        rep.bound = rep.objective
    rep.wall_seconds = time.perf_counter() - t0
    return attach_values(rep, prog)
