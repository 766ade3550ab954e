"""MPS export of a :class:`~otsldr.program.MathProgram`.

Row and column names are mangled to ``R0000001`` / ``C0000001`` so they fit
the 8-character name fields of fixed-format MPS; the original names are
listed in leading comment lines.  Numbers are written with ``repr`` so every
coefficient survives a round trip exactly, which can overflow the 12-character
numeric fields; readers that split on whitespace (free MPS) accept the file.
"""
from __future__ import annotations

import io

import numpy as np

from ..errors import NameCollisionError
from ..program import EQ, GE, LE, MathProgram

NAME_WIDTH = 8
OBJ_ROW = "COST"
_SENSE = {LE: "L", GE: "G", EQ: "E"}


def _mangle(prefix, count):
    digits = NAME_WIDTH - len(prefix)
    if count >= 10**digits:
        raise NameCollisionError(f"{count} names do not fit {NAME_WIDTH}-character MPS fields")
    return [f"{prefix}{i + 1:0{digits}d}" for i in range(count)]


def _num(x):
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _line(f1="", f2="", f3="", f4="", f5="", f6=""):
    # fixed-format field starts: 2, 5, 15, 25, 40, 50 (1-based)
    s = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:<12}"
    if f5:
        s += f"   {f5:<8}  {f6}"
    return s.rstrip()


def export_program(prog: MathProgram, name=None) -> str:
    """Return ``prog`` as MPS text (ROWS, COLUMNS, RHS, RANGES, BOUNDS)."""
    cols = _mangle("C", prog.n_vars)
    rows = _mangle("R", prog.n_rows)
    out = io.StringIO()
    w = out.write
    w(f"* {prog.metadata.get('builder', 'program')}: {prog.n_rows} rows, {prog.n_vars} columns\n")
    for mangled, orig in zip(cols, prog.var_names()):
        w(f"* {mangled} {orig}\n")
    for mangled, orig in zip(rows, prog.row_names()):
        w(f"* {mangled} {orig}\n")
    w(f"NAME          {(name or prog.metadata.get('builder', 'PROGRAM'))[:NAME_WIDTH].upper()}\n")
    w("ROWS\n")
    w(_line("N", OBJ_ROW) + "\n")
    for r, s in zip(rows, prog.sense):
        w(_line(_SENSE[s], r) + "\n")

    w("COLUMNS\n")
    A = prog.A.tocsc()
    A.sort_indices()
    in_int = False
    for j in range(prog.n_vars):
        if prog.binary[j] and not in_int:
            w("    MARKER                 'MARKER'                 'INTORG'\n")
            in_int = True
        elif not prog.binary[j] and in_int:
            w("    MARKER                 'MARKER'                 'INTEND'\n")
            in_int = False
        entries = []
        if prog.c[j] != 0:
            entries.append((OBJ_ROW, prog.c[j]))
        for k in range(A.indptr[j], A.indptr[j + 1]):
            if A.data[k] != 0:
                entries.append((rows[A.indices[k]], A.data[k]))
        if not entries:
            # keep the column declared even when it appears nowhere
            entries.append((OBJ_ROW, 0.0))
        for k in range(0, len(entries), 2):
            pair = entries[k:k + 2]
            if len(pair) == 2:
                w(_line("", cols[j], pair[0][0], _num(pair[0][1]), pair[1][0], _num(pair[1][1]))
                  + "\n")
            else:
                w(_line("", cols[j], pair[0][0], _num(pair[0][1])) + "\n")
    if in_int:
        w("    MARKER                 'MARKER'                 'INTEND'\n")

    w("RHS\n")
    if prog.c0 != 0:
        # the objective row's RHS is the negated constant term
        w(_line("", "RHS", OBJ_ROW, _num(-prog.c0)) + "\n")
    for r, v in zip(rows, prog.rhs):
        if v != 0:
            w(_line("", "RHS", r, _num(v)) + "\n")
    w("RANGES\n")
    w("BOUNDS\n")
    for j, c in enumerate(cols):
        lo, hi = prog.lb[j], prog.ub[j]
        if prog.binary[j] and lo == 0 and hi == 1:
            w(_line("BV", "BND", c) + "\n")
            continue
        if lo == hi:
            w(_line("FX", "BND", c, _num(lo)) + "\n")
            continue
        if np.isneginf(lo) and np.isposinf(hi):
            w(_line("FR", "BND", c) + "\n")
            continue
        if np.isneginf(lo):
            w(_line("MI", "BND", c) + "\n")
        elif lo != 0 or hi < 0 or prog.binary[j]:
            w(_line("LO", "BND", c, _num(lo)) + "\n")
        if np.isfinite(hi):
            w(_line("UP", "BND", c, _num(hi)) + "\n")
        elif prog.binary[j]:
            w(_line("PL", "BND", c) + "\n")
    w("ENDATA\n")
    return out.getvalue()


def write_mps(prog: MathProgram, path, name=None):
    text = export_program(prog, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
