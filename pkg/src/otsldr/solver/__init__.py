"""LP and MILP solving for :class:`~otsldr.program.MathProgram` instances."""
from .lp import farkas_lp, solve_lp
from .milp import enumerate_milp, enumeration_size, open_key, solve_milp
from .report import SolveReport
from .simplex import farkas_check, simplex

__all__ = [
    "SolveReport", "solve_lp", "solve_milp", "enumerate_milp", "enumeration_size",
    "farkas_lp", "farkas_check", "simplex", "open_key",
]
