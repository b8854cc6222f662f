"""Independent cross-checks: a primal transport LP and a brute-force dual scan.

The primal LP restricts the worst-case distribution to a finite support grid,
so its value is a lower bound on the true robust bound; any feasible dual
point evaluates to an upper bound.  Together they sandwich both solvers:

    primal_lp_bound <= true value = dual optimum <= dual_grid_oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CostKind, ProblemSpec, cost_value
from .dual import dual_value_many, xi_threshold
from .errors import DomainError, InfeasibleError
from .simplex import simplex_max
from .spherical import standardize


@dataclass(frozen=True)
class SupportGrid:
    """Strictly increasing candidate support for the discretized primal."""

    points: tuple

    def __init__(self, points):
        pts = tuple(float(p) for p in points)
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise DomainError("support grid must be strictly increasing")
        if len(pts) < 2:
            raise DomainError("support grid needs at least two points")
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


def default_support_grid(problem: ProblemSpec, m: int = 600) -> SupportGrid:
    """Uniform grid spanning the sample +- 3 sigma, plus the sample points and
    tau (with one-spacing neighbors so an indicator jump is representable)."""
    x = problem.sample.as_array()
    sigma = problem.moments.sigma
    lo = min(x.min(), problem.moments.mu) - 3.0 * sigma
    hi = max(x.max(), problem.moments.mu) + 3.0 * sigma
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    base = np.linspace(lo, hi, m)
    spacing = (hi - lo) / (m - 1)
    extra = [problem.tau, problem.tau - spacing, problem.tau + spacing]
    pts = np.unique(np.concatenate([base, x, np.asarray(extra)]))
    return SupportGrid(pts)


def primal_lp_bound(problem: ProblemSpec, grid: SupportGrid | None = None) -> float:
    """Lower bound from the transport LP restricted to a finite support.

    Variables are the joint masses pi[i, j] of moving weight from sample
    point i to grid point j, plus a slack on the transport budget.
    """
    if grid is None:
        grid = default_support_grid(problem)
    x = problem.sample.as_array()
    y = grid.as_array()
    n, m = x.size, y.size
    psi = cost_value(problem.kind, problem.tau, y)

    nvar = n * m + 1  # trailing slack for the budget inequality
    rows = n + 3
    a = np.zeros((rows, nvar))
    b = np.zeros(rows)
    for i in range(n):
        a[i, i * m:(i + 1) * m] = 1.0
        b[i] = 1.0 / n
    cost_block = (y[None, :] - x[:, None]) ** 2
    a[n, :n * m] = cost_block.ravel()
    a[n, -1] = 1.0
    b[n] = problem.delta
    a[n + 1, :n * m] = np.tile(y, n)
    b[n + 1] = problem.moments.mu
    a[n + 2, :n * m] = np.tile(y * y, n)
    b[n + 2] = problem.moments.second_raw

    # Row scaling keeps the mixed-unit constraints comparably conditioned.
    scale = np.maximum(np.abs(a).max(axis=1), 1e-300)
    a /= scale[:, None]
    b /= scale

    c = np.zeros(nvar)
    c[:n * m] = np.tile(psi, n)

    try:
        _, value = simplex_max(c, a, b)
    except InfeasibleError as exc:
        raise InfeasibleError(
            f"restricted primal infeasible on a {grid.m}-point grid "
            f"(may be a grid artifact): {exc}") from exc
    return float(value)


def dual_grid_oracle(problem: ProblemSpec,
                     angular: int = 80, radial: int = 200) -> float:
    """Coarse exhaustive dual minimization: always an upper bound.

    Scans a spherical lattice (angular x angular cells, log-spaced radii) in
    standardized coordinates and returns the smallest feasible dual value.
    """
    scaled, _, _, s = standardize(problem)
    thetas = (np.arange(angular) + 0.5) * (math.pi / angular)
    phis = (np.arange(angular) + 0.5) * (2.0 * math.pi / angular)
    radii = np.geomspace(1e-4, 1e4, radial)

    sin_t = np.sin(thetas)[:, None]
    cos_t = np.cos(thetas)[:, None]
    dir1 = sin_t * np.cos(phis)[None, :]
    dir2 = np.broadcast_to(cos_t, dir1.shape)
    dir3 = sin_t * np.sin(phis)[None, :]
    feas_dir = dir1 >= 0.0
    d1 = dir1[feas_dir]
    d2 = dir2[feas_dir]
    d3 = dir3[feas_dir]

    thr = xi_threshold(problem.kind)
    best = math.inf
    # Chunk over radii to bound memory; every lattice point is a genuine
    # dual evaluation, so the minimum is a certified upper bound.
    for r in radii:
        xi = r * (d1 + d3)
        ok = xi > thr
        if not ok.any():
            continue
        vals = dual_value_many(scaled, r * d1[ok], r * d2[ok], r * d3[ok])
        v = float(vals.min())
        if v < best:
            best = v
    return best * s
