"""Central tolerance and solver configuration.

A JSON file named by the ``OTS_LDR_CONFIG`` environment variable may
override any field of :class:`SolverConfig`.
"""
import dataclasses
import json
import os
from dataclasses import dataclass

ENV_VAR = "OTS_LDR_CONFIG"


@dataclass(frozen=True)
class SolverConfig:
    feas_tol: float = 1e-8
    opt_tol: float = 1e-8
    int_tol: float = 1e-9
    mip_gap: float = 1e-6
    max_iter: int = 50_000
    max_nodes: int = 100_000
    # programs with more rows than this go to HiGHS instead of the dense simplex
    dense_row_limit: int = 400
    lp_backend: str = "auto"  # auto | simplex | highs
    milp_backend: str = "bnb"  # bnb | highs
    refactor_every: int = 64
    bland_after: int = 50  # degenerate pivots before switching to Bland's rule

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


DEFAULT = SolverConfig()


def load_config(path=None):
    """Return the active config, reading ``path`` or ``$OTS_LDR_CONFIG``."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return DEFAULT
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    known = {f.name for f in dataclasses.fields(SolverConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return SolverConfig(**raw)
