"""Wind uncertainty support sets: polytope form, moments, sampling, vertices."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import (
    DimensionTooLargeError,
    EmptyBoxError,
    NotFullDimensionalError,
    PSDError,
    UnsupportedSupportError,
)

RNG_ALGORITHM = "numpy.PCG64"
MAX_VERTEX_DIM = 20


@dataclass(frozen=True)
class UncertaintyPolytope:
    """Support set ``{xi : S xi <= t}`` with the first two moments of xi."""

    S: np.ndarray
    t: np.ndarray
    mu: np.ndarray
    second_moment: np.ndarray | None = None
    box: tuple[np.ndarray, np.ndarray] | None = field(default=None)

    @property
    def K(self):
        return self.S.shape[1]

    @property
    def m(self):
        return self.S.shape[0]

    def contains(self, xi, tol=1e-12):
        xi = np.asarray(xi, dtype=float)
        return bool(np.all(self.S @ xi <= self.t + tol))

    def is_degenerate_box(self):
        return self.box is not None and bool(np.any(self.box[1] - self.box[0] <= 0))

    def covariance(self):
        if self.second_moment is None:
            return None
        return self.second_moment - np.outer(self.mu, self.mu)

    def moment_matrix(self):
        """E[(1, xi)(1, xi)^T] as a (K+1) x (K+1) matrix."""
        if self.second_moment is None:
            return None
        K = self.K
        M = np.empty((K + 1, K + 1))
        M[0, 0] = 1.0
        M[0, 1:] = self.mu
        M[1:, 0] = self.mu
        M[1:, 1:] = self.second_moment
        return M


def box_support(xi_min, xi_max, mu=None, allow_degenerate=False) -> UncertaintyPolytope:
    """Box support with uniform-distribution moments.

    Zero-width coordinates are rejected unless ``allow_degenerate`` is set;
    they are useful for collapse studies but the set is then not
    full-dimensional.
    """
    lo = np.atleast_1d(np.asarray(xi_min, dtype=float))
    hi = np.atleast_1d(np.asarray(xi_max, dtype=float))
    if lo.shape != hi.shape:
        raise ValueError("xi_min and xi_max differ in length")
    bad = np.flatnonzero(lo > hi if allow_degenerate else lo >= hi)
    if bad.size:
        raise EmptyBoxError(f"empty or flat box in coordinates {bad.tolist()}")
    K = lo.size
    S = np.vstack([np.eye(K), -np.eye(K)])
    t = np.concatenate([hi, -lo])
    mu = (lo + hi) / 2 if mu is None else np.asarray(mu, dtype=float)
    # uniform on the box: independent coordinates, variance width^2 / 12
    second = np.outer(mu, mu) + np.diag((hi - lo) ** 2 / 12.0)
    return UncertaintyPolytope(S=S, t=t, mu=mu, second_moment=second, box=(lo, hi))


def proportional_box(nominal, rho, allow_degenerate=False):
    """Zero-centred box of half-width ``rho * nominal`` per wind farm."""
    nominal = np.asarray(nominal, dtype=float)
    half = rho * np.abs(nominal)
    return box_support(-half, half, mu=np.zeros_like(half), allow_degenerate=allow_degenerate)


def polytope(S, t, mu, second_moment=None) -> UncertaintyPolytope:
    poly = UncertaintyPolytope(
        S=np.atleast_2d(np.asarray(S, dtype=float)),
        t=np.asarray(t, dtype=float),
        mu=np.asarray(mu, dtype=float),
        second_moment=None if second_moment is None else np.asarray(second_moment, dtype=float),
    )
    check_polytope(poly)
    return poly


def support_max(poly: UncertaintyPolytope, a) -> float:
    """max a^T xi over the support, by LP."""
    a = np.asarray(a, dtype=float)
    if poly.K == 0:
        return 0.0
    res = linprog(-a, A_ub=poly.S, b_ub=poly.t, bounds=[(None, None)] * poly.K, method="highs")
    if res.status == 3:
        return np.inf
    if res.status != 0:
        raise NotFullDimensionalError(f"support LP failed: {res.message}")
    return -res.fun


def box_max(lo, hi, a) -> float:
    """Analytic max of a^T xi over the box [lo, hi]."""
    a = np.asarray(a, dtype=float)
    center = (np.asarray(lo) + np.asarray(hi)) / 2
    half = (np.asarray(hi) - np.asarray(lo)) / 2
    return float(a @ center + np.abs(a) @ half)


def chebyshev_radius(poly: UncertaintyPolytope) -> float:
    """Radius of the largest ball inside the support (0 if flat, -1 if empty)."""
    if poly.K == 0:
        return 0.0
    norms = np.linalg.norm(poly.S, axis=1)
    c = np.zeros(poly.K + 1)
    c[-1] = -1.0
    A = np.hstack([poly.S, norms[:, None]])
    res = linprog(c, A_ub=A, b_ub=poly.t, bounds=[(None, None)] * poly.K + [(0, None)],
                  method="highs")
    if res.status == 2:
        return -1.0
    if res.status == 3:
        return np.inf
    return float(res.x[-1])


def is_full_dimensional(poly: UncertaintyPolytope, tol=1e-10) -> bool:
    if poly.K == 0:
        return True
    return chebyshev_radius(poly) > tol


def check_polytope(poly: UncertaintyPolytope, require_full_dim=True):
    """Validate boundedness, non-emptiness, mean membership and moments."""
    K = poly.K
    if poly.t.shape != (poly.m,) or poly.mu.shape != (K,):
        raise ValueError("inconsistent polytope dimensions")
    r = chebyshev_radius(poly)
    if r < 0:
        raise NotFullDimensionalError("support set is empty")
    for k in range(K):
        e = np.zeros(K)
        e[k] = 1.0
        if not (np.isfinite(support_max(poly, e)) and np.isfinite(support_max(poly, -e))):
            raise UnsupportedSupportError(f"support unbounded along coordinate {k}")
    if require_full_dim and K and r <= 1e-10:
        raise NotFullDimensionalError("support set has no interior point")
    if not poly.contains(poly.mu, tol=1e-9):
        raise ValueError("mean lies outside the support")
    check_moments(poly)


def check_moments(poly: UncertaintyPolytope, tol=1e-12):
    cov = poly.covariance()
    if cov is None:
        return
    if not np.allclose(cov, cov.T, atol=tol):
        raise PSDError("second moment is not symmetric")
    if cov.size and np.linalg.eigvalsh((cov + cov.T) / 2).min() < -tol * max(1.0, np.abs(cov).max()):
        raise PSDError("second moment minus mu mu^T is not positive semidefinite")


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def sample(poly: UncertaintyPolytope, count: int, seed: int) -> np.ndarray:
    """``count`` i.i.d. uniform draws from a box support, shape (count, K)."""
    if poly.box is None:
        raise UnsupportedSupportError("sampling is only defined for box supports")
    lo, hi = poly.box
    rng = make_rng(seed)
    u = rng.random((count, poly.K))
    xi = lo + u * (hi - lo)
    # guard against lo + 1.0*(hi-lo) rounding past hi
    return np.clip(xi, lo, hi)


def vertices(poly: UncertaintyPolytope) -> np.ndarray:
    """All 2^K box corners in lexicographic order, shape (2^K, K)."""
    if poly.box is None:
        raise UnsupportedSupportError("vertex enumeration is only defined for box supports")
    K = poly.K
    if K > MAX_VERTEX_DIM:
        raise DimensionTooLargeError(f"K={K} exceeds {MAX_VERTEX_DIM}")
    lo, hi = poly.box
    pts = list(itertools.product(*[(lo[k], hi[k]) for k in range(K)]))
    return np.array(pts, dtype=float).reshape(len(pts), K)
