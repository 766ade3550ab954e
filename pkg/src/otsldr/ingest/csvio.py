"""CSV output for solve reports and tables, plus solution and scenario files.

Everything goes through :mod:`csv` with its default dialect, which quotes per
RFC 4180 and ends lines with CRLF.  Floats are printed with nine digits after
the decimal point so repeated runs produce byte-identical files.
"""
from __future__ import annotations

import csv
import math

import numpy as np

from ..solver.report import SolveReport

REPORT_COLUMNS = ("objective", "open_lines", "status", "method", "L_o", "K", "S", "bound",
                  "nodes", "n_rows", "n_vars")


def fmt(value):
    """Render one cell: fixed nine decimals for floats, ``;``-joined sequences."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return ""
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        out = f"{v:.9f}"
        return "0.000000000" if out == "-0.000000000" else out
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(fmt(v) for v in value)
    return str(value)


def report_row(rep: SolveReport, method=None):
    meta = rep.metadata
    values = {
        "objective": rep.objective, "open_lines": rep.open_lines, "status": rep.status,
        "method": method or meta.get("method") or meta.get("builder"),
        "L_o": meta.get("max_open"), "K": meta.get("K"), "S": meta.get("S"),
        "bound": rep.bound, "nodes": rep.nodes, "n_rows": meta.get("n_rows"),
        "n_vars": meta.get("n_vars"),
    }
    return values


def write_csv_report(report, path, timings=False, method=None):
    """Write a SolveReport (one row) or an EvaluationTable to ``path``.

    Wall-clock columns are left out unless ``timings`` is set, since they
    differ between otherwise identical runs.
    """
    from ..evaluation import COLUMNS, VOLATILE, EvaluationTable

    if isinstance(report, SolveReport):
        header = list(REPORT_COLUMNS)
        rows = [report_row(report, method)]
        if timings:
            header.append("wall_seconds")
            rows[0]["wall_seconds"] = report.wall_seconds
    elif isinstance(report, EvaluationTable):
        header = [c for c in COLUMNS if timings or c not in VOLATILE]
        rows = report.rows
    else:
        raise TypeError(f"cannot write {type(report).__name__} as a CSV report")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in rows:
            wr.writerow([fmt(row.get(c)) for c in header])
    return path


def write_solution_csv(report: SolveReport, prog, path):
    """``name,value`` per variable, values written with full precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["name", "value"])
        for name, v in zip(prog.var_names(), report.x):
            wr.writerow([name, repr(float(v))])
    return path


def read_solution_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header != ["name", "value"]:
            raise ValueError(f"{path}: expected header name,value")
        return {name: float(value) for name, value in rd}


def write_scenarios_csv(xi, path):
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow([f"xi{k + 1}" for k in range(xi.shape[1])])
        for row in xi:
            wr.writerow([repr(float(v)) for v in row])
    return path


def read_scenarios_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        data = [[float(v) for v in row] for row in rd]
    return np.array(data, dtype=float).reshape(len(data), len(header))
