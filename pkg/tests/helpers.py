"""Shared builders for tests: tiny hand cases and seeded random grids."""
import numpy as np

from otsldr.ingest.case import case_from_dict
from otsldr.network import build_grid, build_operators


def two_bus_doc(lines=1, load=100.0, g_max=200.0, c=10.0, wind=None, max_open=0):
    """Generator at bus 1, load at bus 2, ``lines`` parallel unit-susceptance lines."""
    doc = {
        "base_mva": 100.0, "ref_bus": 1, "max_open": max_open,
        "buses": [{"id": 1, "theta_min": -1.0, "theta_max": 1.0, "load": 0.0},
                  {"id": 2, "theta_min": -1.0, "theta_max": 1.0, "load": load}],
        "lines": [{"from": 1, "to": 2, "b": 1.0, "f_min": -150.0, "f_max": 150.0,
                   "switchable": True} for _ in range(lines)],
        "gens": [{"bus": 1, "c": c, "q": 0.0, "g_min": 0.0, "g_max": g_max,
                  "r_minus": -50.0, "r_plus": 50.0, "agc": True}],
        "wind": wind or [],
    }
    return doc


def setup(doc):
    grid = build_grid(case_from_dict(doc))
    return grid, build_operators(grid)


def random_doc(seed, n_max=8, l_max=12, k=None, width=0.2, max_open=2):
    """Connected random grid with spare capacity so every case is feasible with all lines closed.

    Line limits are drawn tight enough that switching sometimes pays off.
    """
    rng = np.random.default_rng(seed)
    N = int(rng.integers(3, n_max + 1))
    edges = [(int(rng.integers(0, i)), i) for i in range(1, N)]  # random spanning tree
    extra = int(rng.integers(1, l_max - (N - 1) + 1))
    pairs = [(i, j) for i in range(N) for j in range(i + 1, N)]
    for _ in range(extra):
        edges.append(pairs[int(rng.integers(len(pairs)))])
    edges = edges[:l_max]
    loads = np.round(rng.uniform(0.0, 60.0, N), 1)
    G = int(rng.integers(1, min(3, N) + 1))
    gen_bus = rng.choice(N, G, replace=False)
    total = float(loads.sum())
    K = int(rng.integers(0, 3)) if k is None else k
    wind_bus = rng.choice(N, K, replace=False) if K else []
    nominal = np.round(rng.uniform(5.0, 20.0, K), 1)
    gens = []
    for j, bus in enumerate(gen_bus):
        gens.append({"bus": int(bus) + 1, "c": float(np.round(rng.uniform(10, 50), 1)),
                     "q": float(np.round(rng.uniform(0, 5), 1)), "g_min": 0.0,
                     "g_max": float(np.ceil(total + 50)), "r_minus": -40.0, "r_plus": 40.0,
                     "agc": True})
    lines = []
    for i, j in edges:
        lim = float(np.round(rng.uniform(0.25, 0.9) * total + 10, 0))
        lines.append({"from": i + 1, "to": j + 1, "b": float(np.round(rng.uniform(2, 20), 2)),
                      "f_min": -lim, "f_max": lim, "switchable": True})
    wind = [{"bus": int(b) + 1, "nominal": float(p), "xi_min": -width * float(p),
             "xi_max": width * float(p)} for b, p in zip(wind_bus, nominal)]
    return {
        "base_mva": 100.0, "ref_bus": 1, "max_open": max_open,
        "buses": [{"id": i + 1, "theta_min": -0.8, "theta_max": 0.8, "load": float(loads[i])}
                  for i in range(N)],
        "lines": lines, "gens": gens, "wind": wind, "name": f"random{seed}",
    }


def random_case(seed, **kw):
    """First feasible ``random_doc`` in a seed-derived sequence, as ``(doc, grid, ops)``."""
    from otsldr.formulation import build_deterministic
    from otsldr.solver import solve_milp

    for attempt in range(50):
        doc = random_doc(1000 * seed + attempt, **kw)
        grid, ops = setup(doc)
        if solve_milp(build_deterministic(grid, ops, 0)).optimal:
            return doc, grid, ops
    raise RuntimeError(f"no feasible random case for seed {seed}")
