"""Bounded-variable revised simplex on dense matrices.

The LP is taken in the form

    min c^T x   s.t.  row_lo <= A x <= row_hi,   lb <= x <= ub

and rewritten with one logical variable per row, ``A x - w = 0``, so every
constraint becomes a bound.  Phase 1 is the composite method: the cost of
each basic variable is -1/+1 while it sits below/above its bounds, which
lets the solve start from any basis (that is what makes warm starts from a
parent node cheap).  At a phase-1 optimum with remaining infeasibility the
multipliers give a Farkas certificate directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..config import DEFAULT
from ..errors import NumericalError

AT_LB, AT_UB, FREE, BASIC = 0, 1, 2, 3

_PIVOT_TOL = 1e-9


@dataclass
class SimplexResult:
    status: str  # Optimal | Infeasible | Unbounded | IterLimit
    x: np.ndarray | None
    objective: float
    row_duals: np.ndarray | None  # d obj / d (active row bound)
    reduced_costs: np.ndarray | None
    iterations: int
    basis: tuple | None  # (head, state) for warm starts
    farkas: dict | None = None  # non-negative weights, see farkas_check


def geometric_scaling(A, passes=4):
    """Row and column factors (powers of two) equilibrating |A| geometrically."""
    m, n = A.shape
    R = np.ones(m)
    C = np.ones(n)
    absA = np.abs(A)
    nz = absA > 0
    if not nz.any():
        return R, C
    with np.errstate(invalid="ignore", divide="ignore"):
        return _equilibrate(absA, nz, R, C, passes)


def _equilibrate(absA, nz, R, C, passes):
    for _ in range(passes):
        S = absA * R[:, None] * C[None, :]
        big = np.where(nz, S, 0.0).max(axis=1)
        small = np.where(nz, S, np.inf).min(axis=1)
        rf = np.where(big > 0, 1.0 / np.sqrt(big * small), 1.0)
        R *= rf
        S = absA * R[:, None] * C[None, :]
        big = np.where(nz, S, 0.0).max(axis=0)
        small = np.where(nz, S, np.inf).min(axis=0)
        cf = np.where(big > 0, 1.0 / np.sqrt(big * small), 1.0)
        C *= cf
    # powers of two keep the scaling exact in floating point
    R = np.exp2(np.round(np.log2(R)))
    C = np.exp2(np.round(np.log2(C)))
    return R, C


def _dot_finite(w, v):
    mask = w > 0
    return float(w[mask] @ v[mask])


def farkas_check(A, row_lo, row_hi, lb, ub, cert):
    """Return ``(residual, value)`` for an infeasibility certificate.

    The certificate weights the constraints ``a_r x <= row_hi``,
    ``-a_r x <= -row_lo``, ``x <= ub`` and ``-x <= -lb``; it is valid when the
    weighted left-hand sides cancel (residual ~ 0) and the weighted right-hand
    sides sum to a negative value.
    """
    y = cert["row_upper"] - cert["row_lower"]
    g = A.T @ y + cert["col_upper"] - cert["col_lower"]
    value = (_dot_finite(cert["row_upper"], row_hi) - _dot_finite(cert["row_lower"], row_lo)
             + _dot_finite(cert["col_upper"], ub) - _dot_finite(cert["col_lower"], lb))
    return float(np.max(np.abs(g), initial=0.0)), value


def _split(lam):
    lam = np.where(np.abs(lam) < 1e-13, 0.0, lam)
    return np.maximum(lam, 0.0), np.maximum(-lam, 0.0)


def crossed_bounds_certificate(m, n, row_lo, row_hi, lb, ub):
    """Certificate for a row or column whose lower bound exceeds its upper bound."""
    cert = {k: np.zeros(m if k.startswith("row") else n)
            for k in ("row_upper", "row_lower", "col_upper", "col_lower")}
    rows = np.flatnonzero(row_lo > row_hi)
    if rows.size:
        cert["row_upper"][rows[0]] = cert["row_lower"][rows[0]] = 1.0
        return cert
    cols = np.flatnonzero(lb > ub)
    if cols.size:
        cert["col_upper"][cols[0]] = cert["col_lower"][cols[0]] = 1.0
        return cert
    return None


class _Simplex:
    def __init__(self, c, A, row_lo, row_hi, lb, ub, config, scale=True):
        A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
        m, n = A.shape
        self.m, self.n = m, n
        self.cfg = config
        if scale and m and n:
            R, C = geometric_scaling(A)
        else:
            R, C = np.ones(m), np.ones(n)
        self.R, self.C = R, C
        self.A = A * R[:, None] * C[None, :]
        with np.errstate(invalid="ignore"):
            self.lo = np.concatenate([lb / C, row_lo * R])
            self.hi = np.concatenate([ub / C, row_hi * R])
        self.cost = np.concatenate([c * C, np.zeros(m)])
        self.tol = config.feas_tol * 1e-1
        self.dtol = config.opt_tol * 1e-1

    def column(self, j):
        if j < self.n:
            return self.A[:, j]
        e = np.zeros(self.m)
        e[j - self.n] = -1.0
        return e

    def basis_matrix(self, head):
        B = np.empty((self.m, self.m))
        for k, j in enumerate(head):
            B[:, k] = self.column(j)
        return B

    def nonbasic_value(self, j, state):
        if state == AT_LB:
            return self.lo[j]
        if state == AT_UB:
            return self.hi[j]
        return 0.0

    def initial_state(self, basis):
        n, m = self.n, self.m
        total = n + m
        state = np.empty(total, dtype=int)
        for j in range(total):
            state[j] = self._default_state(j)
        head = np.arange(n, n + m)
        if basis is not None:
            whead, wstate = basis
            if len(whead) == m and len(wstate) == total:
                state = np.array(wstate, dtype=int)
                for j in range(total):
                    if state[j] != BASIC:
                        state[j] = self._repair_state(j, state[j])
                head = np.array(whead, dtype=int)
                state[head] = BASIC
        state[head] = BASIC
        return head, state

    def _default_state(self, j):
        if np.isfinite(self.lo[j]):
            return AT_LB
        if np.isfinite(self.hi[j]):
            return AT_UB
        return FREE

    def _repair_state(self, j, s):
        if s == AT_LB and np.isfinite(self.lo[j]):
            return AT_LB
        if s == AT_UB and np.isfinite(self.hi[j]):
            return AT_UB
        return self._default_state(j)

    def solve(self, basis=None):
        cfg = self.cfg
        m, n = self.m, self.n
        total = n + m
        head, state = self.initial_state(basis)
        try:
            Binv = np.linalg.inv(self.basis_matrix(head)) if m else np.zeros((0, 0))
        except np.linalg.LinAlgError:
            head, state = self.initial_state(None)
            Binv = -np.eye(m)
        x = np.zeros(total)
        self._recompute(head, state, Binv, x)

        iters = 0
        degenerate = 0
        since_refactor = 0
        while True:
            xb = x[head]
            lob, hib = self.lo[head], self.hi[head]
            below = xb < lob - self.tol
            above = xb > hib + self.tol
            phase1 = bool(below.any() or above.any())
            if phase1:
                cb = np.where(below, -1.0, np.where(above, 1.0, 0.0))
                cn = np.zeros(total)
            else:
                cb = self.cost[head]
                cn = self.cost
            y = Binv.T @ cb if m else np.zeros(0)
            d = cn.copy()
            d[:n] -= self.A.T @ y
            d[n:] += y
            d[head] = 0.0

            bland = degenerate > cfg.bland_after
            q, direction = self._price(d, state, bland)
            if q < 0:
                if phase1:
                    return self._infeasible(head, state, x, y, cb, d, iters)
                return self._optimal(head, state, x, y, d, iters)
            if iters >= cfg.max_iter:
                return SimplexResult("IterLimit", None, np.nan, None, None, iters, (head, state))

            alpha = Binv @ self.column(q) if m else np.zeros(0)
            delta = -direction * alpha
            step, leave, leave_state = self._ratio(x, head, delta, below, above, bland)
            span = self.hi[q] - self.lo[q]
            if np.isfinite(span) and span <= step:
                step, leave = span, -1
            if not np.isfinite(step):
                if phase1:
                    raise NumericalError("unbounded phase-1 direction", condition=_cond(Binv))
                return SimplexResult("Unbounded", None, -np.inf, None, None, iters, (head, state))

            iters += 1
            degenerate = degenerate + 1 if step <= 1e-12 else 0
            x[q] += direction * step
            if m:
                x[head] += step * delta
            if leave < 0:
                state[q] = AT_UB if direction > 0 else AT_LB
                x[q] = self.nonbasic_value(q, state[q])
                continue
            piv = alpha[leave]
            if abs(piv) < _PIVOT_TOL:
                raise NumericalError(f"pivot {piv:.3e} too small", condition=_cond(Binv))
            out = head[leave]
            state[out] = leave_state
            x[out] = self.nonbasic_value(out, leave_state)
            head[leave] = q
            state[q] = BASIC
            # product-form update of the explicit inverse
            row = Binv[leave] / piv
            Binv -= np.outer(alpha, row)
            Binv[leave] = row
            since_refactor += 1
            if since_refactor >= cfg.refactor_every:
                try:
                    Binv = np.linalg.inv(self.basis_matrix(head))
                except np.linalg.LinAlgError as exc:
                    raise NumericalError("singular basis on refactorization") from exc
                self._recompute(head, state, Binv, x)
                since_refactor = 0

    def _recompute(self, head, state, Binv, x):
        n, m = self.n, self.m
        nonbasic = np.flatnonzero(state != BASIC)
        for j in nonbasic:
            x[j] = self.nonbasic_value(j, state[j])
        if not m:
            return
        # A x_struct - w = 0  =>  basic part solves B x_B = -(N x_N)
        xs = np.where(state[:n] == BASIC, 0.0, x[:n])
        rhs = self.A @ xs
        wn = np.where(state[n:] == BASIC, 0.0, x[n:])
        rhs = rhs - wn
        x[head] = -(Binv @ rhs)

    def _price(self, d, state, bland):
        lo, hi = self.lo, self.hi
        movable = hi > lo
        up = ((state == AT_LB) | (state == FREE)) & (d < -self.dtol) & movable
        down = ((state == AT_UB) | (state == FREE)) & (d > self.dtol) & movable
        cand = np.flatnonzero(up | down)
        if cand.size == 0:
            return -1, 0
        if bland:
            q = int(cand[0])
        else:
            q = int(cand[np.argmax(np.abs(d[cand]))])
        return q, (1 if up[q] else -1)

    def _ratio(self, x, head, delta, below, above, bland):
        if not self.m:
            return np.inf, -1, AT_LB
        xb = x[head]
        lob, hib = self.lo[head], self.hi[head]
        ratio = np.full(self.m, np.inf)
        where = np.full(self.m, AT_LB)
        inc = delta > _PIVOT_TOL
        dec = delta < -_PIVOT_TOL
        feas = ~(below | above)
        with np.errstate(invalid="ignore", divide="ignore"):
            r_up = np.where(feas, (hib - xb) / delta, np.where(below, (lob - xb) / delta, np.inf))
            r_dn = np.where(feas, (lob - xb) / delta, np.where(above, (hib - xb) / delta, np.inf))
        up_lim = inc & np.isfinite(r_up)
        dn_lim = dec & np.isfinite(r_dn)
        ratio[up_lim] = r_up[up_lim]
        where[up_lim] = np.where(below[up_lim], AT_LB, AT_UB)
        ratio[dn_lim] = r_dn[dn_lim]
        where[dn_lim] = np.where(above[dn_lim], AT_UB, AT_LB)
        ratio = np.maximum(ratio, 0.0)
        best = ratio.min()
        if not np.isfinite(best):
            return np.inf, -1, AT_LB
        ties = np.flatnonzero(ratio <= best + 1e-12)
        if bland:
            k = int(ties[np.argmin(head[ties])])
        else:
            k = int(ties[np.argmax(np.abs(delta[ties]))])
        state = where[k]
        if self.lo[head[k]] == self.hi[head[k]]:
            state = AT_LB
        return float(ratio[k]), k, state

    def _optimal(self, head, state, x, y, d, iters):
        n = self.n
        xs = x[:n] * self.C
        duals = y * self.R if self.m else np.zeros(0)
        rc = d[:n] / self.C
        obj = float(self.cost[:n] @ x[:n])
        return SimplexResult("Optimal", xs, obj, duals, rc, iters, (head.copy(), state.copy()))

    def _infeasible(self, head, state, x, y, cb, d, iters):
        n = self.n
        coef = -d.copy()
        coef[head] = cb
        cu, cl = _split(coef[:n] / self.C)
        ru, rl = _split(coef[n:] * self.R)
        cert = {"row_upper": ru, "row_lower": rl, "col_upper": cu, "col_lower": cl}
        return SimplexResult("Infeasible", None, np.nan, None, None, iters,
                             (head.copy(), state.copy()), farkas=cert)


def _cond(Binv):
    if Binv.size == 0:
        return 1.0
    return float(np.linalg.cond(Binv))


def simplex(c, A, row_lo, row_hi, lb, ub, config=DEFAULT, basis=None, scale=True) -> SimplexResult:
    """Solve ``min c^T x`` over ``row_lo <= A x <= row_hi``, ``lb <= x <= ub``.

    ``basis`` is the ``(head, state)`` pair from an earlier result on a program
    with the same matrix; bounds may differ.
    """
    c = np.asarray(c, dtype=float)
    row_lo, row_hi = np.asarray(row_lo, float), np.asarray(row_hi, float)
    lb, ub = np.asarray(lb, float), np.asarray(ub, float)
    cert = crossed_bounds_certificate(row_lo.size, c.size, row_lo, row_hi, lb, ub)
    if cert is not None:
        return SimplexResult("Infeasible", None, np.nan, None, None, 0, None, farkas=cert)
    solver = _Simplex(c, A, row_lo, row_hi, lb, ub, config, scale=scale)
    res = solver.solve(basis)
    if res.status == "Optimal":
        res.objective = float(c @ res.x)
    return res
