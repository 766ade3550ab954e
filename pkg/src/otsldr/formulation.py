"""Optimization programs for transmission switching under wind uncertainty.

Every builder returns a :class:`~otsldr.program.MathProgram` whose objective
is in $/h.  Variable blocks share names across builders (``g``, ``theta``,
``f``, ``z``, ``gamma``, ``Y_theta``, ``y_theta``, ``Y_f``, ``y_f``) so the
first-stage decision can be read the same way from any solution.

The semi-infinite rows of the affine-policy programs are all expressed as
:class:`AffineRows` families, ``base(x) + sum_k xi_k * slope_k(x)``, and then
handed to one of three treatments: exact robustification over the support
(:func:`robustify_rows`), coefficient splitting for equalities
(:func:`split_rows`), or the moment-weighted relaxation used by the lower
bound (:func:`weak_rows`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import MissingMomentsError, NotFullDimensionalError, ScenarioOutsideSupportError
from .network import Grid, NetworkOperators
from .program import MathProgram, ProgramBuilder
from .uncertainty import UncertaintyPolytope, check_moments, is_full_dimensional, vertices

# ---------------------------------------------------------------------------
# affine row families


@dataclass
class AffineRows:
    """``n`` rows of the form ``base(x) + base_const + sum_k xi_k (slope_k(x) + slope_const_k)``.

    ``base`` and each ``slope[k]`` are lists of ``(coef, idx)`` terms in the
    format accepted by :meth:`ProgramBuilder.add_rows`.
    """

    n: int
    base: list = field(default_factory=list)
    base_const: np.ndarray | None = None
    slope: list = field(default_factory=list)
    slope_const: list = field(default_factory=list)

    def __post_init__(self):
        if self.base_const is None:
            self.base_const = np.zeros(self.n)
        K = len(self.slope)
        if not self.slope_const:
            self.slope_const = [np.zeros(self.n) for _ in range(K)]

    @property
    def K(self):
        return len(self.slope)


def _scaled(terms, s):
    return [(_scale_coef(coef, s), idx) for coef, idx in terms]


def _scale_coef(coef, s):
    if sp.issparse(coef):
        return coef * s
    return np.asarray(coef, dtype=float) * s


def robustify_rows(b: ProgramBuilder, name, rows: AffineRows, rhs, poly: UncertaintyPolytope):
    """Add ``rows <= rhs`` for every xi in the support, via LP duality.

    For each row r a fresh multiplier vector ``alpha_r >= 0`` (one entry per
    support inequality) is introduced with ``alpha_r S = slope_r`` and
    ``base_r + alpha_r t <= rhs_r``.  Returns the index array of the
    ``alpha`` block, shape ``(n, m)``.
    """
    n, m, K = rows.n, poly.m, poly.K
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), (n,))
    if rows.K != K:
        raise ValueError(f"{name}: rows have {rows.K} xi-slopes, support has {K}")
    alpha = b.add_vars(f"alpha_{name}", (n, m), lb=0.0)
    for k in range(K):
        # sum_j alpha[r, j] S[j, k] - slope_k(x)_r = slope_const_k_r
        S_k = sp.kron(sp.identity(n), poly.S[:, k].reshape(1, -1))
        b.add_rows(f"{name}_dual[{k}]", [(S_k, alpha)] + _scaled(rows.slope[k], -1.0), "=",
                   rows.slope_const[k])
    T = sp.kron(sp.identity(n), poly.t.reshape(1, -1))
    b.add_rows(f"{name}_worst", rows.base + [(T, alpha)], "<=", rhs - rows.base_const)
    return alpha


def split_rows(b: ProgramBuilder, name, rows: AffineRows, rhs=0.0):
    """Add ``rows == rhs`` for every xi of a full-dimensional support.

    That holds exactly when every xi-slope vanishes and the base equals the
    right-hand side, so ``K + 1`` ordinary equality blocks are emitted.
    """
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), (rows.n,))
    for k in range(rows.K):
        b.add_rows(f"{name}[xi{k}]", rows.slope[k], "=", -rows.slope_const[k])
    b.add_rows(f"{name}[const]", rows.base, "=", rhs - rows.base_const)


def moment_equal_rows(b: ProgramBuilder, name, rows: AffineRows, M, rhs=0.0):
    """Add ``E[(rows - rhs) (1, xi)^T] = 0`` for the moment matrix ``M``.

    Equivalent to :func:`split_rows` when ``M`` is non-singular; for a
    degenerate support it only constrains the directions the distribution
    actually spans.
    """
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), (rows.n,))
    for col in range(M.shape[0]):
        w = M[:, col]
        terms = _scaled(rows.base, w[0])
        const = w[0] * (rows.base_const - rhs)
        for k in range(rows.K):
            if w[k + 1] != 0:
                terms += _scaled(rows.slope[k], w[k + 1])
                const = const + w[k + 1] * rows.slope_const[k]
        b.add_rows(f"{name}[m{col}]", terms, "=", -const)


def weak_rows(b: ProgramBuilder, name, rows: AffineRows, rhs, V):
    """Relax ``rows <= rhs`` (for all xi) to ``E[slack(xi) * v_j^T (1, xi)] >= 0``.

    ``V`` holds one test vector per row, each of the form ``M w`` where
    ``w^T (1, xi) >= 0`` on the support; a non-negative slack function
    satisfies every such inequality, so the relaxation never cuts off a
    feasible recourse.
    """
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), (rows.n,))
    for j, v in enumerate(V):
        terms = _scaled(rows.base, v[0])
        const = v[0] * (rows.base_const - rhs)
        for k in range(rows.K):
            if v[k + 1] != 0:
                terms += _scaled(rows.slope[k], v[k + 1])
                const = const + v[k + 1] * rows.slope_const[k]
        b.add_rows(f"{name}_weak[{j}]", terms, "<=", -const)


def robustify_le(coeff_const, coeff_xi, rhs, poly: UncertaintyPolytope) -> MathProgram:
    """Robust counterpart of ``coeff_const + coeff_xi @ xi <= rhs`` for all xi in the support.

    Returns a program over the multiplier block ``alpha`` (rows x m, >= 0)
    that is feasible exactly when the robust inequality holds; its objective
    is ``sum(alpha t)`` so a solve recovers the worst-case multipliers.
    """
    coeff_const = np.atleast_1d(np.asarray(coeff_const, dtype=float))
    coeff_xi = np.atleast_2d(np.asarray(coeff_xi, dtype=float))
    n = coeff_const.size
    b = ProgramBuilder("robustify_le")
    rows = AffineRows(n=n, base_const=coeff_const, slope=[[] for _ in range(poly.K)],
                      slope_const=[coeff_xi[:, k].copy() for k in range(poly.K)])
    alpha = robustify_rows(b, "row", rows, rhs, poly)
    b.add_objective(alpha, np.tile(poly.t, n))
    return b.build(m=poly.m, K=poly.K)


def split_equality(coeff_xi, coeff_const, poly: UncertaintyPolytope | None = None):
    """Split ``coeff_xi @ xi + coeff_const == 0`` (for all xi) into its two parts.

    Returns ``(xi_rows, const_rows)``: every entry of both must vanish.
    Only valid on a full-dimensional support, which is checked when ``poly``
    is given.
    """
    if poly is not None and not is_full_dimensional(poly):
        raise NotFullDimensionalError("equality splitting needs a full-dimensional support")
    H = np.atleast_2d(np.asarray(coeff_xi, dtype=float))
    h = np.atleast_1d(np.asarray(coeff_const, dtype=float))
    return H.reshape(-1), h


# ---------------------------------------------------------------------------
# shared blocks


def _first_stage(b, grid: Grid, ops: NetworkOperators, max_open, with_gamma):
    """Variables and rows of the deterministic switching model."""
    N, L = grid.N, grid.L
    th_lo, th_hi = grid.theta_min.copy(), grid.theta_max.copy()
    th_lo[grid.ref] = th_hi[grid.ref] = 0.0
    v = {
        "g": b.add_vars("g", (grid.G,), lb=grid.g_min, ub=grid.g_max),
        "theta": b.add_vars("theta", (N,), lb=th_lo, ub=th_hi),
        "f": b.add_vars("f", (L,)),
        "z": b.add_vars("z", (L,), lb=np.where(grid.switchable, 0.0, 1.0), ub=1.0,
                        binary=grid.switchable),
    }
    if with_gamma:
        v["gamma"] = b.add_vars("gamma", (grid.G,), lb=np.where(grid.agc, -np.inf, 0.0),
                                ub=np.where(grid.agc, np.inf, 0.0))
    I_L = np.ones(L)
    b.add_rows("flow_min", [(I_L, v["f"]), (-grid.f_min, v["z"])], ">=", 0.0)
    b.add_rows("flow_max", [(I_L, v["f"]), (-grid.f_max, v["z"])], "<=", 0.0)
    b.add_rows("balance", [(ops.A, v["f"]), (-ops.C_gen, v["g"])], "=",
               -grid.load + ops.F @ grid.wind_nominal)
    b.add_rows("bigm_lo", [(ops.K_mat, v["theta"]), (-I_L, v["f"]), (-ops.M_diag, v["z"])],
               ">=", -ops.M_diag)
    b.add_rows("bigm_hi", [(ops.K_mat, v["theta"]), (-I_L, v["f"]), (ops.M_diag, v["z"])],
               "<=", ops.M_diag)
    b.add_rows("max_open", [(np.ones((1, L)), v["z"])], ">=", L - max_open)
    b.add_objective(v["g"], grid.base_mva * grid.c)
    return v


def deterministic_row_count(grid: Grid):
    return 4 * grid.L + grid.N + 1


def _meta(grid, ops, max_open, **extra):
    return dict(case=grid.name, N=grid.N, L=grid.L, G=grid.G, K=grid.K, max_open=max_open,
                base_mva=grid.base_mva, **extra)


def build_deterministic(grid: Grid, ops: NetworkOperators, max_open=None) -> MathProgram:
    """Deterministic switching MILP at the nominal wind output."""
    max_open = grid.max_open if max_open is None else max_open
    b = ProgramBuilder("deterministic")
    _first_stage(b, grid, ops, max_open, with_gamma=False)
    return b.build(**_meta(grid, ops, max_open, S=None))


def _scenario_block(b, grid, ops, v, s, xi):
    """Rows enforcing the recourse constraints at one realization ``xi``."""
    N, L, G = grid.N, grid.L, grid.G
    sigma = float(np.sum(xi))
    thp = b.add_vars(f"theta_s{s}", (N,))
    fp = b.add_vars(f"f_s{s}", (L,))
    g, th, f, z, gam = v["g"], v["theta"], v["f"], v["z"], v["gamma"]
    I_N, I_L, I_G = np.ones(N), np.ones(L), np.ones(G)
    sig = np.full(G, sigma)
    b.add_rows(f"reserve_lo_s{s}", [(sig, gam)], ">=", grid.r_minus)
    b.add_rows(f"reserve_hi_s{s}", [(sig, gam)], "<=", grid.r_plus)
    b.add_rows(f"gen_lo_s{s}", [(I_G, g), (sig, gam)], ">=", grid.g_min)
    b.add_rows(f"gen_hi_s{s}", [(I_G, g), (sig, gam)], "<=", grid.g_max)
    b.add_rows(f"theta_lo_s{s}", [(I_N, th), (I_N, thp)], ">=", _theta_lo(grid))
    b.add_rows(f"theta_hi_s{s}", [(I_N, th), (I_N, thp)], "<=", _theta_hi(grid))
    b.add_rows(f"flow_min_s{s}", [(I_L, f), (I_L, fp), (-grid.f_min, z)], ">=", 0.0)
    b.add_rows(f"flow_max_s{s}", [(I_L, f), (I_L, fp), (-grid.f_max, z)], "<=", 0.0)
    b.add_rows(f"balance_s{s}", [(ops.A, f), (ops.A, fp), (-ops.C_gen, g), (-sigma * ops.C_gen, gam)],
               "=", -grid.load + ops.F @ (grid.wind_nominal + xi))
    b.add_rows(f"bigm_lo_s{s}", [(ops.K_mat, th), (ops.K_mat, thp), (-I_L, f), (-I_L, fp),
                                 (-ops.M_diag, z)], ">=", -ops.M_diag)
    b.add_rows(f"bigm_hi_s{s}", [(ops.K_mat, th), (ops.K_mat, thp), (-I_L, f), (-I_L, fp),
                                 (ops.M_diag, z)], "<=", ops.M_diag)


def scenario_block_rows(grid: Grid):
    return 4 * grid.G + 3 * grid.N + 4 * grid.L


def _theta_lo(grid):
    lo = grid.theta_min.copy()
    lo[grid.ref] = 0.0
    return lo


def _theta_hi(grid):
    hi = grid.theta_max.copy()
    hi[grid.ref] = 0.0
    return hi


def _check_scenarios(poly, scenarios, tol=1e-9):
    scenarios = np.asarray(scenarios, dtype=float).reshape(len(scenarios), poly.K)
    for s, xi in enumerate(scenarios):
        if not poly.contains(xi, tol=tol):
            raise ScenarioOutsideSupportError(f"scenario {s} lies outside the support")
    return scenarios


def _two_stage(name, grid, ops, max_open, scenarios, mean_xi_total):
    b = ProgramBuilder(name)
    v = _first_stage(b, grid, ops, max_open, with_gamma=True)
    for s, xi in enumerate(scenarios):
        _scenario_block(b, grid, ops, v, s, xi)
    # expected reserve cost q^T gamma * E[1^T xi]
    b.add_objective(v["gamma"], grid.base_mva * grid.q * mean_xi_total)
    return b, v


def build_saa(grid: Grid, ops: NetworkOperators, max_open, poly: UncertaintyPolytope,
              scenarios, mean_total=None) -> MathProgram:
    """Sample-average program: recourse constraints imposed at every scenario.

    ``mean_total`` overrides the sample mean of ``1^T xi`` in the objective,
    which lets a subset of a larger sample carry the full sample's objective.
    """
    max_open = grid.max_open if max_open is None else max_open
    if len(scenarios) == 0:
        raise ValueError("SAA needs at least one scenario")
    scenarios = _check_scenarios(poly, scenarios)
    if mean_total is None:
        mean_total = float(scenarios.sum(axis=1).mean())
    b, _ = _two_stage("saa", grid, ops, max_open, scenarios, mean_total)
    return b.build(**_meta(grid, ops, max_open, S=len(scenarios),
                           base_rows=deterministic_row_count(grid),
                           block_rows=scenario_block_rows(grid)))


def build_vertex_program(grid: Grid, ops: NetworkOperators, max_open,
                         poly: UncertaintyPolytope) -> MathProgram:
    """Exact two-stage program on a box: recourse at every vertex, mean-based cost."""
    max_open = grid.max_open if max_open is None else max_open
    verts = vertices(poly)
    b, _ = _two_stage("vertex_oracle", grid, ops, max_open, verts, float(np.sum(poly.mu)))
    return b.build(**_meta(grid, ops, max_open, S=None, n_vertices=len(verts)))


# ---------------------------------------------------------------------------
# affine policies


def _ldr_variables(b, grid, K):
    N, L = grid.N, grid.L
    return {
        "Y_theta": b.add_vars("Y_theta", (N, K)),
        "y_theta": b.add_vars("y_theta", (N,)),
        "Y_f": b.add_vars("Y_f", (L, K)),
        "y_f": b.add_vars("y_f", (L,)),
    }


def _ldr_families(grid, ops, v, K):
    """Row families of the two-stage constraints under an affine recourse.

    Returns ``(inequalities, balance)`` where ``inequalities`` maps a group name
    to ``(rows, rhs, first_stage_only)`` for ``rows <= rhs``.
    """
    N, L, G = grid.N, grid.L, grid.G
    I_N, I_L, I_G = np.ones(N), np.ones(L), np.ones(G)
    g, th, f, z, gam = v["g"], v["theta"], v["f"], v["z"], v["gamma"]
    Yt, yt, Yf, yf = v["Y_theta"], v["y_theta"], v["Y_f"], v["y_f"]

    groups = {}
    # reserve limits on gamma * 1^T xi
    groups["reserve_lo"] = (AffineRows(G, [], None, [[(-I_G, gam)] for _ in range(K)]), -grid.r_minus, True)
    groups["reserve_hi"] = (AffineRows(G, [], None, [[(I_G, gam)] for _ in range(K)]), grid.r_plus, True)
    groups["gen_lo"] = (AffineRows(G, [(-I_G, g)], None, [[(-I_G, gam)] for _ in range(K)]), -grid.g_min, True)
    groups["gen_hi"] = (AffineRows(G, [(I_G, g)], None, [[(I_G, gam)] for _ in range(K)]), grid.g_max, True)
    groups["theta_lo"] = (AffineRows(N, [(-I_N, th), (-I_N, yt)], None,
                                     [[(-I_N, Yt[:, k])] for k in range(K)]), -_theta_lo(grid), False)
    groups["theta_hi"] = (AffineRows(N, [(I_N, th), (I_N, yt)], None,
                                     [[(I_N, Yt[:, k])] for k in range(K)]), _theta_hi(grid), False)
    groups["flow_min"] = (AffineRows(L, [(-I_L, f), (-I_L, yf), (grid.f_min, z)], None,
                                     [[(-I_L, Yf[:, k])] for k in range(K)]), 0.0, False)
    groups["flow_max"] = (AffineRows(L, [(I_L, f), (I_L, yf), (-grid.f_max, z)], None,
                                     [[(I_L, Yf[:, k])] for k in range(K)]), 0.0, False)
    Km, Md = ops.K_mat, ops.M_diag
    groups["bigm_lo"] = (AffineRows(L, [(-Km, th), (-Km, yt), (I_L, f), (I_L, yf), (Md, z)], None,
                                    [[(-Km, Yt[:, k]), (I_L, Yf[:, k])] for k in range(K)]), Md, False)
    groups["bigm_hi"] = (AffineRows(L, [(Km, th), (Km, yt), (-I_L, f), (-I_L, yf), (Md, z)], None,
                                    [[(Km, Yt[:, k]), (-I_L, Yf[:, k])] for k in range(K)]), Md, False)
    # A(f + y_f + Y_f xi) - C(g + gamma 1^T xi) + d - F(nominal + xi) == 0
    balance = AffineRows(
        N,
        [(ops.A, f), (ops.A, yf), (-ops.C_gen, g)],
        grid.load - ops.F @ grid.wind_nominal,
        [[(ops.A, Yf[:, k]), (-ops.C_gen, gam)] for k in range(K)],
        [-ops.F[:, k] for k in range(K)],
    )
    return groups, balance


def ldr_row_count(grid: Grid, m: int, K: int):
    robust_rows = 4 * grid.G + 2 * grid.N + 4 * grid.L
    return deterministic_row_count(grid) + robust_rows * (K + 1) + grid.N * (K + 1)


def build_primal_ldr(grid: Grid, ops: NetworkOperators, max_open, poly: UncertaintyPolytope,
                     allow_degenerate=False) -> MathProgram:
    """Affine-recourse restriction, robustified over the support (an upper bound).

    The balance equality is split coefficient-wise, which is exact on a
    full-dimensional support.  ``allow_degenerate`` accepts flat supports;
    the split is then merely sufficient, so the program stays a valid
    (conservative) restriction.
    """
    max_open = grid.max_open if max_open is None else max_open
    K = poly.K
    if K != grid.K:
        raise ValueError(f"support has dimension {K}, grid has {grid.K} wind farms")
    if not allow_degenerate and not is_full_dimensional(poly):
        raise NotFullDimensionalError("primal LDR needs a full-dimensional support")
    b = ProgramBuilder("primal_ldr")
    v = _first_stage(b, grid, ops, max_open, with_gamma=True)
    v.update(_ldr_variables(b, grid, K))
    groups, balance = _ldr_families(grid, ops, v, K)
    for name, (rows, rhs, _) in groups.items():
        robustify_rows(b, name, rows, rhs, poly)
    split_rows(b, "balance_xi", balance)
    b.add_objective(v["gamma"], grid.base_mva * grid.q * float(np.sum(poly.mu)))
    return b.build(**_meta(grid, ops, max_open, S=None, m=poly.m))


def support_test_vectors(poly: UncertaintyPolytope):
    """Rows ``M w`` for every valid ``w^T (1, xi) >= 0``: the constant 1 and ``t - S xi``."""
    M = poly.moment_matrix()
    W = np.vstack([np.eye(1, poly.K + 1), np.hstack([poly.t[:, None], -poly.S])])
    return W @ M  # M is symmetric, so row j is (M w_j)^T


def build_dual_ldr(grid: Grid, ops: NetworkOperators, max_open, poly: UncertaintyPolytope,
                   fixed_z=None) -> MathProgram:
    """Lower-bounding program from affine dual multipliers.

    Restricting the multipliers of the recourse constraints to affine maps
    of xi is equivalent to keeping the recourse affine while only asking the
    slack of each inequality to be non-negative in the weak sense
    ``E[slack(xi) * w^T (1, xi)] >= 0`` for every ``w`` valid on the support,
    and the balance to hold in the ``E[residual * (1, xi)^T] = 0`` sense.
    This relaxes the two-stage program, so its value is a lower bound.  Rows
    that involve first-stage decisions only (reserve and generator limits)
    are kept exact through robustification, which keeps the bound valid and
    tightens it.
    """
    max_open = grid.max_open if max_open is None else max_open
    if poly.second_moment is None:
        raise MissingMomentsError("dual LDR needs the second moment of xi")
    check_moments(poly)
    K = poly.K
    b = ProgramBuilder("dual_ldr")
    v = _first_stage(b, grid, ops, max_open, with_gamma=True)
    v.update(_ldr_variables(b, grid, K))
    groups, balance = _ldr_families(grid, ops, v, K)
    V = support_test_vectors(poly)
    for name, (rows, rhs, first_stage_only) in groups.items():
        if first_stage_only:
            robustify_rows(b, name, rows, rhs, poly)
        else:
            weak_rows(b, name, rows, rhs, V)
    if is_full_dimensional(poly):
        split_rows(b, "balance_xi", balance)
    else:
        moment_equal_rows(b, "balance_xi", balance, poly.moment_matrix())
    b.add_objective(v["gamma"], grid.base_mva * grid.q * float(np.sum(poly.mu)))
    prog = b.build(**_meta(grid, ops, max_open, S=None, m=poly.m,
                           z_multiplier_coupling="multipliers independent of z"))
    if fixed_z is not None:
        zb = prog.block("z")
        lb, ub = prog.lb.copy(), prog.ub.copy()
        lb[zb.start:zb.stop] = ub[zb.start:zb.stop] = np.asarray(fixed_z, dtype=float)
        prog = prog.with_bounds(lb, ub)
    return prog


# ---------------------------------------------------------------------------
# solutions


@dataclass(frozen=True)
class FirstStage:
    g: np.ndarray
    theta: np.ndarray
    f: np.ndarray
    z: np.ndarray
    gamma: np.ndarray

    @classmethod
    def from_report(cls, report):
        vals = report.values
        gam = vals.get("gamma")
        if gam is None:
            gam = np.zeros_like(vals["g"])
        return cls(g=vals["g"], theta=vals["theta"], f=vals["f"], z=np.round(vals["z"]),
                   gamma=gam)


@dataclass(frozen=True)
class AffinePolicy:
    """Recourse map xi -> (g', theta', f')."""

    Y_theta: np.ndarray
    y_theta: np.ndarray
    Y_f: np.ndarray
    y_f: np.ndarray
    gamma: np.ndarray

    @classmethod
    def from_report(cls, report):
        v = report.values
        return cls(v["Y_theta"], v["y_theta"], v["Y_f"], v["y_f"], v["gamma"])

    def theta_prime(self, xi):
        return self.Y_theta @ np.asarray(xi) + self.y_theta

    def f_prime(self, xi):
        return self.Y_f @ np.asarray(xi) + self.y_f

    def g_prime(self, xi):
        return self.gamma * float(np.sum(xi))


def recourse_violation(grid: Grid, ops: NetworkOperators, first: FirstStage, xi, theta_p, f_p):
    """Largest violation of the two-stage constraints at one realization."""
    xi = np.asarray(xi, dtype=float)
    gp = first.gamma * float(np.sum(xi))
    th = first.theta + theta_p
    fl = first.f + f_p
    flow = ops.K_mat @ th - fl
    slack_M = ops.M_diag * (1 - first.z)
    parts = [
        grid.r_minus - gp, gp - grid.r_plus,
        grid.g_min - (first.g + gp), first.g + gp - grid.g_max,
        _theta_lo(grid) - th, th - _theta_hi(grid),
        grid.f_min * first.z - fl, fl - grid.f_max * first.z,
        np.abs(ops.A @ fl - ops.C_gen @ (first.g + gp) + grid.load
               - ops.F @ (grid.wind_nominal + xi)),
        -(flow + slack_M), flow - slack_M,
    ]
    return float(max(np.max(p, initial=0.0) for p in parts))


def policy_violation(grid, ops, first: FirstStage, policy: AffinePolicy, xi):
    return recourse_violation(grid, ops, first, xi, policy.theta_prime(xi), policy.f_prime(xi))
