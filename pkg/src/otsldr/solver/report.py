from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
ITER_LIMIT = "IterLimit"
NODE_LIMIT = "NodeLimit"


@dataclass
class SolveReport:
    status: str
    objective: float = np.nan
    x: np.ndarray | None = None
    values: dict = field(default_factory=dict)
    row_duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    z: np.ndarray | None = None
    nodes: int = 0
    iterations: int = 0
    lp_solves: int = 0
    wall_seconds: float = 0.0
    backend: str = ""
    bound: float = np.nan
    bound_trace: list = field(default_factory=list)
    farkas: dict | None = None
    basis: tuple | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def optimal(self):
        return self.status == OPTIMAL

    @property
    def open_lines(self):
        """1-based indices of open lines (z = 0)."""
        if self.z is None:
            return []
        return [int(l) + 1 for l in np.flatnonzero(np.asarray(self.z) < 0.5)]

    def __getitem__(self, block):
        return self.values[block]


def attach_values(report, prog):
    if report.x is None:
        return report
    report.values = {name: blk.take(report.x) for name, blk in prog.var_blocks.items()}
    if "z" in report.values:
        report.z = np.asarray(report.values["z"], dtype=float).ravel()
    return report
