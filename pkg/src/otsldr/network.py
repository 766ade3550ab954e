"""Per-unit grid data and the linear DC network operators built from it."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .ingest.case import CaseFile

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid:
    """Index-dense, per-unit view of a :class:`CaseFile`.

    Power quantities are divided by ``base_mva``; cost coefficients stay in
    $/MWh and are multiplied by ``base_mva`` when objectives are formed.
    """

    name: str
    base_mva: float
    bus_ids: tuple
    ref: int
    theta_min: np.ndarray
    theta_max: np.ndarray
    load: np.ndarray
    line_from: np.ndarray
    line_to: np.ndarray
    b: np.ndarray
    f_min: np.ndarray
    f_max: np.ndarray
    dtheta_max: np.ndarray
    switchable: np.ndarray
    gen_bus: np.ndarray
    c: np.ndarray
    q: np.ndarray
    g_min: np.ndarray
    g_max: np.ndarray
    r_minus: np.ndarray
    r_plus: np.ndarray
    agc: np.ndarray
    wind_bus: np.ndarray
    wind_nominal: np.ndarray
    xi_min: np.ndarray
    xi_max: np.ndarray
    max_open: int

    @property
    def N(self):
        return len(self.bus_ids)

    @property
    def L(self):
        return len(self.b)

    @property
    def G(self):
        return len(self.gen_bus)

    @property
    def K(self):
        return len(self.wind_bus)

    def line_label(self, l):
        """1-based line number as used in reports."""
        return l + 1


def build_grid(case: CaseFile) -> Grid:
    base = case.base_mva
    index = {bus.id: k for k, bus in enumerate(case.buses)}
    th_min = np.array([b.theta_min for b in case.buses], dtype=float)
    th_max = np.array([b.theta_max for b in case.buses], dtype=float)
    frm = np.array([index[ln.from_id] for ln in case.lines], dtype=int)
    to = np.array([index[ln.to_id] for ln in case.lines], dtype=int)
    dth = []
    for ln, i, j in zip(case.lines, frm, to):
        if ln.dtheta_max is not None:
            dth.append(ln.dtheta_max)
        else:
            # widest angle gap the bus boxes allow, so the Big-M stays valid
            dth.append(min(th_max[i] - th_min[j], th_max[j] - th_min[i]))
    grid = Grid(
        name=case.name,
        base_mva=base,
        bus_ids=tuple(b.id for b in case.buses),
        ref=index[case.ref_bus],
        theta_min=th_min,
        theta_max=th_max,
        load=np.array([b.load for b in case.buses], dtype=float) / base,
        line_from=frm,
        line_to=to,
        b=np.array([ln.b for ln in case.lines], dtype=float),
        f_min=np.array([ln.f_min for ln in case.lines], dtype=float) / base,
        f_max=np.array([ln.f_max for ln in case.lines], dtype=float) / base,
        dtheta_max=np.array(dth, dtype=float),
        switchable=np.array([ln.switchable for ln in case.lines], dtype=bool),
        gen_bus=np.array([index[g.bus_id] for g in case.gens], dtype=int),
        c=np.array([g.c for g in case.gens], dtype=float),
        q=np.array([g.q for g in case.gens], dtype=float),
        g_min=np.array([g.g_min for g in case.gens], dtype=float) / base,
        g_max=np.array([g.g_max for g in case.gens], dtype=float) / base,
        r_minus=np.array([g.r_minus for g in case.gens], dtype=float) / base,
        r_plus=np.array([g.r_plus for g in case.gens], dtype=float) / base,
        agc=np.array([g.agc for g in case.gens], dtype=bool),
        wind_bus=np.array([index[w.bus_id] for w in case.wind], dtype=int),
        wind_nominal=np.array([w.nominal for w in case.wind], dtype=float) / base,
        xi_min=np.array([w.xi_min for w in case.wind], dtype=float) / base,
        xi_max=np.array([w.xi_max for w in case.wind], dtype=float) / base,
        max_open=case.max_open,
    )
    if grid.L and not is_connected(grid):
        log.warning("grid %s: the full line set does not connect all buses", grid.name)
    return grid


def is_connected(grid: Grid, closed=None) -> bool:
    """Whether the lines selected by ``closed`` (default: all) connect every bus."""
    mask = np.ones(grid.L, dtype=bool) if closed is None else np.asarray(closed, dtype=bool)
    if grid.N <= 1:
        return True
    adj = coo_matrix(
        (np.ones(mask.sum()), (grid.line_from[mask], grid.line_to[mask])), shape=(grid.N, grid.N)
    )
    n_comp, _ = connected_components(adj, directed=False)
    return n_comp == 1


@dataclass(frozen=True)
class NetworkOperators:
    A: np.ndarray  # N x L incidence, column (i,j) = e_i - e_j
    K_mat: np.ndarray  # L x N, row (i,j) = b_ij (e_i - e_j)^T
    M_diag: np.ndarray  # L Big-M constants b_ij * dtheta_max_ij
    F: np.ndarray  # N x K wind placement
    C_gen: np.ndarray  # N x G generator placement


def build_operators(grid: Grid) -> NetworkOperators:
    N, L = grid.N, grid.L
    lines = np.arange(L)
    A = np.zeros((N, L))
    A[grid.line_from, lines] = 1.0
    A[grid.line_to, lines] = -1.0
    K_mat = A.T * grid.b[:, None]
    M = grid.b * grid.dtheta_max
    F = np.zeros((N, grid.K))
    F[grid.wind_bus, np.arange(grid.K)] = 1.0
    C = np.zeros((N, grid.G))
    C[grid.gen_bus, np.arange(grid.G)] = 1.0
    return NetworkOperators(A=A, K_mat=K_mat, M_diag=M, F=F, C_gen=C)
