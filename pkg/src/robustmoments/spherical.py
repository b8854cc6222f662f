"""Spherical-coordinate solver: angular grid search with radial minimization.

The dual multipliers are reparameterized as

    lambda1 = r sin(theta) cos(phi),  lambda2 = r cos(theta),
    lambda3 = r sin(theta) sin(phi),

so that for fixed angles the objective is a one-dimensional convex function
of the radius r with special structure per cost kind: piecewise linear with
at most n breakpoints (tail indicators), smooth between hinge deactivation
radii (first-order kinds), or smooth with a single interior stationary
point (second-order kinds).  The solver minimizes the radial function in
every feasible grid cell and takes the smallest value, reducing cells in
row-major order so results do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CostKind, ProblemSpec
from .descent import BoundResult
from .dual import DualPoint, dual_value
from .errors import DomainError, InfeasibleError

_UNBOUNDED_MSG = ("radial objective decreases without bound; the moment targets "
                  "are unreachable within the transport budget")


@dataclass(frozen=True)
class SphericalPoint:
    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if not self.r >= 0.0:
            raise DomainError(f"radius must be >= 0, got {self.r}")
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise DomainError(f"phi must lie in [0, 2*pi), got {self.phi}")


@dataclass(frozen=True)
class GridSpec:
    theta_count: int = 750
    phi_count: int = 750
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.theta_count < 2 or self.phi_count < 2:
            raise DomainError("grid needs at least 2 cells per angle")
        if not self.epsilon > 0.0:
            raise DomainError("radial floor must be positive")


class UnboundedRayError(InfeasibleError):
    """Radial derivative stays negative to the search ceiling."""


def spherical_to_dual(p: SphericalPoint) -> DualPoint:
    lam1 = p.r * math.sin(p.theta) * math.cos(p.phi)
    if lam1 < 0.0:
        raise DomainError(f"spherical point maps to lambda1 = {lam1} < 0")
    return DualPoint(lambda1=lam1,
                     lambda2=p.r * math.cos(p.theta),
                     lambda3=p.r * math.sin(p.theta) * math.sin(p.phi))


def standardize(problem: ProblemSpec):
    """Shift/scale the data to mean 0, deviation 1, with the exact dual map.

    Under x -> (x - m)/c the bound scales by s = c^order and the multipliers
    transform linearly: lam1' = lam1 c^2/s, lam2' = (lam2 + 2 m lam3) c/s,
    lam3' = lam3 c^2/s, with F(lam) = s F'(lam').  Centering makes the dual
    components comparable in size, which keeps the optimum away from the
    spherical poles where an angular grid loses resolution.
    """
    from .core import EmpiricalSample, MomentSpec  # local to avoid cycle noise

    m = problem.moments.mu
    c = problem.moments.sigma
    if not c > 0.0:
        m, c = 0.0, 1.0
    s = c ** problem.kind.order
    scaled = ProblemSpec(
        kind=problem.kind,
        tau=(problem.tau - m) / c,
        moments=MomentSpec((problem.moments.mu - m) / c, problem.moments.sigma / c),
        sample=EmpiricalSample((x - m) / c for x in problem.sample.points),
        delta=problem.delta / (c * c),
    )
    return scaled, m, c, s


def dual_point_from_standardized(point: DualPoint, m: float, c: float, s: float) -> DualPoint:
    """Map multipliers of the standardized problem back to the original one."""
    lam3 = point.lambda3 * s / (c * c)
    lam2 = point.lambda2 * s / c - 2.0 * m * lam3
    lam1 = point.lambda1 * s / (c * c)
    return DualPoint(lam1, lam2, lam3)


def _cell_coefficients(theta: float, phi: float, problem: ProblemSpec):
    """Per-angle constants of the radial objective F(r) at fixed (theta, phi)."""
    x = problem.sample.as_array()
    a0 = math.sin(theta) * math.cos(phi)
    ta = math.sin(theta) * (math.cos(phi) + math.sin(phi))
    tb = a0 * x - 0.5 * math.cos(theta)
    alpha = (a0 * problem.delta + math.cos(theta) * problem.moments.mu
             + math.sin(theta) * math.sin(phi) * problem.moments.second_raw)
    lin = alpha - a0 * float(np.mean(x ** 2))
    return a0, ta, tb, lin


def radial_minimize(kind: CostKind, theta: float, phi: float,
                    problem: ProblemSpec, grid: GridSpec) -> tuple[float, float]:
    """Minimize F(r, theta, phi) over r; returns (r_star, value).

    Tail-indicator kinds scan the at-most-n breakpoint radii for a
    subgradient sign change; first/second-order kinds bisect the radial
    derivative over an expanding bracket (it is monotone by convexity).
    """
    a0, ta, tb, lin = _cell_coefficients(theta, phi, problem)
    if not ta > 0.0 or a0 < 0.0:
        raise DomainError(f"infeasible angles theta={theta}, phi={phi}")
    tau = problem.tau
    n = problem.sample.n
    xstar = tb / ta
    lower = kind.is_lower

    if kind.order == 0:
        g_tau = -ta * tau * tau + 2.0 * tb * tau
        g_vert = tb * tb / ta
        ind = (xstar <= tau) if lower else (xstar >= tau)
        crossing = (xstar > tau) if lower else (xstar < tau)

        def f_of_r(r: float) -> float:
            return r * lin + float(np.mean(np.maximum(1.0 + r * g_tau, ind + r * g_vert)))

        diff = g_vert - g_tau
        with np.errstate(divide="ignore"):
            r_k = np.where(crossing & (diff > 0.0), 1.0 / diff, np.inf)
        eligible = crossing & np.isfinite(r_k) & (r_k >= grid.epsilon)
        # Terms whose breakpoint falls below the floor behave like vertex terms.
        slope = lin + float(np.mean(np.where(eligible, g_tau, g_vert)))
        if slope >= 0.0:
            return grid.epsilon, f_of_r(grid.epsilon)
        if not eligible.any():
            raise UnboundedRayError(_UNBOUNDED_MSG)
        order = np.argsort(r_k[eligible])
        radii = r_k[eligible][order]
        jumps = diff[eligible][order] / n
        for r_j, jump in zip(radii, jumps):
            if slope <= 0.0 <= slope + jump:
                return float(r_j), f_of_r(float(r_j))
            slope += jump
        raise UnboundedRayError(_UNBOUNDED_MSG)

    beta_bar = float(np.mean(tb * tb / ta))
    c_lin = lin + beta_bar

    if kind.order == 1:
        c = (tau - xstar) if lower else (xstar - tau)
        q = 0.25 / ta

        def f_of_r(r: float) -> float:
            return r * c_lin + float(np.mean(np.maximum(0.0, c + q / r)))

        def deriv(r: float) -> float:
            active = int(np.count_nonzero(c + q / r > 0.0))
            return c_lin - (q / (r * r)) * (active / n)

        if c_lin < 0.0:
            raise UnboundedRayError(_UNBOUNDED_MSG)
        if c_lin == 0.0:
            # Infimum approached as r -> inf; report the asymptote.
            return 1e15, f_of_r(1e15)
        lo = grid.epsilon
        if deriv(lo) >= 0.0:
            return lo, f_of_r(lo)
        hi = max(1.0, 2.0 * lo)
        while deriv(hi) < 0.0:
            hi *= 2.0
            if hi > 1e30:
                raise UnboundedRayError(_UNBOUNDED_MSG)
        r_star = _bisect_sign(deriv, lo, hi)
        return r_star, f_of_r(r_star)

    # Second-order kinds: domain r * ta > 1, smooth derivative.
    gap = (tau - xstar) if lower else (xstar - tau)
    s_mean = float(np.mean(np.where(gap > 0.0, gap * gap, 0.0)))
    floor = 1.0 / ta + grid.epsilon

    def f_of_r(r: float) -> float:
        return r * c_lin + s_mean * (r * ta) / (r * ta - 1.0)

    if s_mean == 0.0:
        if c_lin < 0.0:
            raise UnboundedRayError(_UNBOUNDED_MSG)
        return floor, f_of_r(floor)
    if c_lin < 0.0:
        raise UnboundedRayError(_UNBOUNDED_MSG)
    if c_lin == 0.0:
        return 1e15 / ta, f_of_r(1e15 / ta)

    def deriv(r: float) -> float:
        return c_lin - s_mean * ta / (r * ta - 1.0) ** 2

    lo = floor
    if deriv(lo) >= 0.0:
        return lo, f_of_r(lo)
    hi = 2.0 * lo
    while deriv(hi) < 0.0:
        hi *= 2.0
        if hi > 1e30:
            raise UnboundedRayError(_UNBOUNDED_MSG)
    r_star = _bisect_sign(deriv, lo, hi)
    return r_star, f_of_r(r_star)


def _bisect_sign(deriv, lo: float, hi: float, max_iter: int = 200) -> float:
    for _ in range(max_iter):
        if hi - lo <= 1e-10 * (1.0 + hi):
            break
        mid = 0.5 * (lo + hi)
        if deriv(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_sm(problem: ProblemSpec, grid: GridSpec | None = None) -> BoundResult:
    """Robust bound via the angular grid search (row-major deterministic min).

    The problem is standardized first so the angular grid sees multipliers of
    comparable magnitude; the result is mapped back exactly.
    """
    if grid is None:
        grid = GridSpec()
    scaled, m, c, s = standardize(problem)
    inner = _solve_sm_raw(scaled, grid)
    point = dual_point_from_standardized(inner.argmin, m, c, s)
    value = dual_value(problem.kind, point, problem)
    return BoundResult(value=value, argmin=point, method="SM",
                       iterations=inner.iterations, xi_star=point.xi)


def _solve_sm_raw(problem: ProblemSpec, grid: GridSpec) -> BoundResult:
    kind = problem.kind
    x = problem.sample.as_array()
    n = x.size
    tau = problem.tau
    thetas = (np.arange(grid.theta_count) + 0.5) * (math.pi / grid.theta_count)
    phis = (np.arange(grid.phi_count) + 0.5) * (2.0 * math.pi / grid.phi_count)

    sin_t, cos_t = np.sin(thetas), np.cos(thetas)
    sin_p, cos_p = np.sin(phis), np.cos(phis)

    best_val = math.inf
    best_cell = None
    cells_evaluated = 0
    unbounded_seen = False

    # Chunk theta rows so the (cells x n) work arrays stay modest.
    max_elems = 4_000_000
    rows_per_chunk = max(1, max_elems // max(1, grid.phi_count * n))
    for row0 in range(0, grid.theta_count, rows_per_chunk):
        rows = slice(row0, min(row0 + rows_per_chunk, grid.theta_count))
        st = sin_t[rows][:, None]
        ct = cos_t[rows][:, None]
        a0 = st * cos_p[None, :]
        ta = st * (cos_p + sin_p)[None, :]
        feas = (ta > 0.0) & (a0 >= 0.0)
        if not feas.any():
            continue
        idx_r, idx_c = np.nonzero(feas)
        a0f = a0[feas]
        taf = ta[feas]
        ctf = np.broadcast_to(ct, a0.shape)[feas]
        spf = np.broadcast_to(sin_p[None, :], a0.shape)[feas]
        stf = np.broadcast_to(st, a0.shape)[feas]
        lin = (a0f * problem.delta + ctf * problem.moments.mu
               + stf * spf * problem.moments.second_raw) - a0f * float(np.mean(x ** 2))
        tb = a0f[:, None] * x[None, :] - 0.5 * ctf[:, None]
        vals, unb = _radial_minimize_block(kind, taf, tb, lin, tau, n, grid.epsilon)
        cells_evaluated += vals.size
        unbounded_seen = unbounded_seen or bool(unb.any())
        finite = np.isfinite(vals)
        if finite.any():
            j = int(np.argmin(np.where(finite, vals, np.inf)))
            if vals[j] < best_val:
                best_val = float(vals[j])
                best_cell = (row0 + idx_r[j], idx_c[j])

    if unbounded_seen:
        raise UnboundedRayError(_UNBOUNDED_MSG)
    if best_cell is None:
        raise InfeasibleError("no feasible grid cell; widen the angular grid")

    theta = float(thetas[best_cell[0]])
    phi = float(phis[best_cell[1]])
    r_star, _ = radial_minimize(kind, theta, phi, problem, grid)
    point = spherical_to_dual(SphericalPoint(r_star, theta, phi))
    value = dual_value(kind, point, problem)
    return BoundResult(value=value, argmin=point, method="SM",
                       iterations=cells_evaluated, xi_star=point.xi)


def _radial_minimize_block(kind: CostKind, ta, tb, lin, tau, n, epsilon):
    """Vectorized radial minimum over a block of feasible cells.

    Same mathematics as `radial_minimize`, with the derivative roots solved
    in closed form per piece instead of by bisection.  Returns the per-cell
    minimum value and an unbounded-ray flag.
    """
    m = ta.shape[0]
    lower = kind.is_lower
    xstar = tb / ta[:, None]
    unbounded = np.zeros(m, dtype=bool)

    if kind.order == 0:
        g_tau = -ta[:, None] * tau * tau + 2.0 * tb * tau
        g_vert = tb * tb / ta[:, None]
        ind = (xstar <= tau) if lower else (xstar >= tau)
        crossing = (xstar > tau) if lower else (xstar < tau)
        diff = g_vert - g_tau
        with np.errstate(divide="ignore", invalid="ignore"):
            r_k = np.where(crossing & (diff > 0.0), 1.0 / diff, np.inf)
        eligible = np.isfinite(r_k) & (r_k >= epsilon)
        base_slope = lin + np.mean(np.where(eligible, g_tau, g_vert), axis=1)

        order = np.argsort(np.where(eligible, r_k, np.inf), axis=1)
        radii = np.take_along_axis(np.where(eligible, r_k, np.inf), order, axis=1)
        jumps = np.take_along_axis(np.where(eligible, diff, 0.0), order, axis=1) / n
        cum = base_slope[:, None] + np.cumsum(jumps, axis=1)
        # First sorted breakpoint whose right-slope is nonnegative.
        ok = cum >= 0.0
        first = np.argmax(ok, axis=1)
        found = ok.any(axis=1)
        r_star = np.full(m, epsilon)
        use_bp = (base_slope < 0.0) & found
        r_star[use_bp] = radii[np.arange(m), first][use_bp]
        unbounded = (base_slope < 0.0) & ~found
        f1 = 1.0 + r_star[:, None] * g_tau
        f2 = ind + r_star[:, None] * g_vert
        vals = r_star * lin + np.mean(np.maximum(f1, f2), axis=1)
        vals[unbounded] = -np.inf
        return vals, unbounded

    beta_bar = np.mean(tb * tb / ta[:, None], axis=1)
    c_lin = lin + beta_bar

    if kind.order == 1:
        c = (tau - xstar) if lower else (xstar - tau)
        q = 0.25 / ta
        unbounded = c_lin < 0.0
        asymptotic = c_lin == 0.0
        safe_c_lin = np.where(c_lin > 0.0, c_lin, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = np.where(c < 0.0, q[:, None] / np.maximum(-c, 1e-300), np.inf)
        rho_sorted = np.sort(rho, axis=1)
        # Candidate interior roots per interval: m_j = n - j hinges active.
        counts = n - np.arange(n)
        cand = np.sqrt(q[:, None] * counts[None, :] / (n * safe_c_lin[:, None]))
        lo = np.concatenate([np.zeros((m, 1)), rho_sorted[:, :-1]], axis=1)
        valid = (cand >= lo) & (cand <= rho_sorted)
        # A kink can absorb the root when the derivative jumps across zero.
        d_left = safe_c_lin[:, None] - (q[:, None] / rho_sorted ** 2) * (counts[None, :] / n)
        d_right = d_left + (q[:, None] / rho_sorted ** 2) / n
        kink = np.isfinite(rho_sorted) & (d_left <= 0.0) & (d_right >= 0.0)
        r_cand = np.where(valid, cand, np.where(kink, rho_sorted, np.inf))
        r_star = np.min(r_cand, axis=1)
        none_found = ~np.isfinite(r_star)
        # All hinges permanently active (every c >= 0): root of the full sum.
        r_star[none_found] = cand[none_found, 0]
        r_star[asymptotic] = 1e15
        r_star = np.maximum(r_star, epsilon)
        vals = r_star * c_lin + np.mean(np.maximum(0.0, c + q[:, None] / r_star[:, None]),
                                        axis=1)
        vals[unbounded] = -np.inf
        return vals, unbounded

    gap = (tau - xstar) if lower else (xstar - tau)
    s_mean = np.mean(np.where(gap > 0.0, gap * gap, 0.0), axis=1)
    floor = 1.0 / ta + epsilon
    unbounded = c_lin < 0.0
    asymptotic = (c_lin == 0.0) & (s_mean > 0.0)
    safe_c_lin = np.where(c_lin > 0.0, c_lin, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_root = (1.0 + np.sqrt(s_mean * ta / safe_c_lin)) / ta
    r_star = np.where(s_mean > 0.0, r_root, floor)
    r_star = np.where(asymptotic, 1e15 / ta, r_star)
    vals = r_star * c_lin + np.where(
        s_mean > 0.0, s_mean * (r_star * ta) / (r_star * ta - 1.0), 0.0)
    vals = np.where(unbounded, -np.inf, vals)
    return vals, unbounded
