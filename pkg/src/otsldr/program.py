"""Sparse linear/mixed-binary program container shared by builders and solvers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

LE, EQ, GE = "L", "E", "G"
_SENSES = {"<=": LE, "L": LE, "==": EQ, "=": EQ, "E": EQ, ">=": GE, "G": GE}


@dataclass(frozen=True)
class Block:
    name: str
    start: int
    shape: tuple

    @property
    def size(self):
        return int(np.prod(self.shape)) if self.shape else 1

    @property
    def stop(self):
        return self.start + self.size

    def take(self, x):
        return np.asarray(x)[self.start:self.stop].reshape(self.shape)

    def indices(self):
        return np.arange(self.start, self.stop)


@dataclass(frozen=True)
class MathProgram:
    """min c^T x + c0  s.t.  A x (sense) rhs,  lb <= x <= ub,  x_j binary where flagged."""

    c: np.ndarray
    A: sp.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray
    var_blocks: dict
    row_blocks: dict
    c0: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def n_vars(self):
        return self.c.size

    @property
    def n_rows(self):
        return self.rhs.size

    @property
    def n_binary(self):
        return int(self.binary.sum())

    def block(self, name):
        return self.var_blocks[name]

    def var_names(self):
        return _names(self.var_blocks, self.n_vars)

    def row_names(self):
        return _names(self.row_blocks, self.n_rows)

    def row_bounds(self):
        """Rows as ``lo <= A x <= hi`` with infinite sides."""
        lo = np.where(self.sense == LE, -np.inf, self.rhs)
        hi = np.where(self.sense == GE, np.inf, self.rhs)
        return lo, hi

    def objective(self, x):
        return float(self.c @ x + self.c0)

    def max_violation(self, x):
        """Largest absolute violation of any row or bound at ``x``."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.row_bounds()
        ax = self.A @ x
        worst = 0.0
        if ax.size:
            worst = max(worst, float(np.max(np.maximum(lo - ax, ax - hi), initial=0.0)))
        worst = max(worst, float(np.max(np.maximum(self.lb - x, x - self.ub), initial=0.0)))
        return worst

    def with_bounds(self, lb=None, ub=None):
        from dataclasses import replace

        return replace(self, lb=self.lb if lb is None else lb, ub=self.ub if ub is None else ub)

    def relaxed(self):
        """Copy with all binaries treated as continuous on their bounds."""
        from dataclasses import replace

        return replace(self, binary=np.zeros_like(self.binary))

    def counts(self):
        return {
            "builder": self.metadata.get("builder", ""),
            "n_vars_cont": self.n_vars - self.n_binary,
            "n_vars_bin": self.n_binary,
            "n_rows": self.n_rows,
            "S": self.metadata.get("S"),
        }


def _names(blocks, total):
    names = [None] * total
    for blk in blocks.values():
        if blk.shape == ():
            names[blk.start] = blk.name
            continue
        for k, idx in enumerate(np.ndindex(*blk.shape)):
            names[blk.start + k] = f"{blk.name}[{','.join(map(str, idx))}]"
    return names


class ProgramBuilder:
    """Incrementally assemble a :class:`MathProgram` from variable and row blocks.

    Rows are added as a list of ``(coef, idx)`` terms where ``idx`` is an array
    of variable indices (any shape; flattened) and ``coef`` is a matrix with one
    column per index, or a scalar / 1-D array for a diagonal term.
    """

    def __init__(self, builder_name):
        self.name = builder_name
        self._n = 0
        self._lb, self._ub, self._bin = [], [], []
        self._var_blocks = {}
        self._rows = 0
        self._coo = ([], [], [])
        self._sense, self._rhs = [], []
        self._row_blocks = {}
        self._c = {}
        self.c0 = 0.0

    def add_vars(self, name, shape=(), lb=-np.inf, ub=np.inf, binary=False):
        shape = tuple(np.atleast_1d(shape)) if shape != () else ()
        if name in self._var_blocks:
            raise ValueError(f"duplicate variable block {name}")
        size = int(np.prod(shape)) if shape else 1
        blk = Block(name, self._n, shape)
        self._var_blocks[name] = blk
        self._lb.append(np.broadcast_to(np.asarray(lb, dtype=float), shape).ravel())
        self._ub.append(np.broadcast_to(np.asarray(ub, dtype=float), shape).ravel())
        self._bin.append(np.broadcast_to(np.asarray(binary, dtype=bool), shape).ravel())
        self._n += size
        return np.arange(blk.start, blk.stop).reshape(shape)

    def add_rows(self, name, terms, sense, rhs):
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float)).ravel()
        n = None
        rows, cols, vals = self._coo
        for coef, idx in terms:
            idx = np.asarray(idx).ravel()
            mat = _as_matrix(coef, idx.size)
            if n is None:
                n = mat.shape[0]
            elif mat.shape[0] != n:
                raise ValueError(f"{name}: term row counts differ ({mat.shape[0]} vs {n})")
            mat = mat.tocoo()
            keep = mat.data != 0
            rows.append(mat.row[keep] + self._rows)
            cols.append(idx[mat.col[keep]])
            vals.append(mat.data[keep])
        if n is None:
            n = rhs.size
        if rhs.size == 1 and n != 1:
            rhs = np.full(n, rhs[0])
        if rhs.size != n:
            raise ValueError(f"{name}: rhs has {rhs.size} entries for {n} rows")
        sense = np.broadcast_to(np.asarray([_SENSES[s] for s in np.atleast_1d(sense)]), (n,))
        if name in self._row_blocks:
            raise ValueError(f"duplicate row block {name}")
        self._row_blocks[name] = Block(name, self._rows, (n,))
        self._sense.append(np.array(sense))
        self._rhs.append(rhs)
        self._rows += n
        return np.arange(self._rows - n, self._rows)

    def add_objective(self, idx, coef):
        idx = np.asarray(idx).ravel()
        coef = np.broadcast_to(np.asarray(coef, dtype=float), idx.shape)
        for j, v in zip(idx, coef):
            self._c[int(j)] = self._c.get(int(j), 0.0) + float(v)

    def build(self, **metadata) -> MathProgram:
        rows, cols, vals = (np.concatenate(a) if a else np.zeros(0) for a in self._coo)
        A = sp.csr_matrix(
            (vals.astype(float), (rows.astype(int), cols.astype(int))), shape=(self._rows, self._n)
        )
        A.sum_duplicates()
        c = np.zeros(self._n)
        for j, v in self._c.items():
            c[j] = v
        cat = lambda parts, dt: np.concatenate(parts).astype(dt) if parts else np.zeros(0, dt)
        prog = MathProgram(
            c=c,
            A=A,
            sense=cat(self._sense, "<U1"),
            rhs=cat(self._rhs, float),
            lb=cat(self._lb, float),
            ub=cat(self._ub, float),
            binary=cat(self._bin, bool),
            var_blocks=dict(self._var_blocks),
            row_blocks=dict(self._row_blocks),
            c0=self.c0,
            metadata={"builder": self.name, **metadata},
        )
        prog.metadata.update(n_rows=prog.n_rows, n_vars=prog.n_vars, n_vars_bin=prog.n_binary)
        return prog


def _as_matrix(coef, ncols):
    if sp.issparse(coef):
        mat = coef
    else:
        arr = np.asarray(coef, dtype=float)
        if arr.ndim == 0:
            mat = sp.identity(ncols, format="coo") * float(arr)
        elif arr.ndim == 1:
            if arr.size != ncols:
                raise ValueError("1-D coefficients are diagonal and need one entry per variable")
            mat = sp.diags(arr)
        else:
            mat = sp.coo_matrix(arr)
    if mat.shape[1] != ncols:
        raise ValueError(f"coefficient has {mat.shape[1]} columns for {ncols} variables")
    return sp.coo_matrix(mat)
