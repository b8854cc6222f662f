"""Directional descent over the multiplier half-plane, plus the outer search.

For a fixed xi = lambda1 + lambda3 the dual objective restricted to
(lambda1 >= 0, lambda2) is a convex piecewise quadratic whose pieces are
separated by straight "breaklines" (one or two parallel families per sample
point, depending on the cost kind).  The plane solver walks the induced
arrangement: it starts at the best arrangement vertex, repeatedly jumps
toward the minimizer of the quadratic active in an adjacent region (clipped
at the first breakline crossing), falls back to exact one-dimensional
searches along sector directions, and stops when no feasible direction
descends.  The robust bound is then the minimum of the plane values over
xi, located by bracketing and golden-section search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CostKind, ProblemSpec
from .dual import (PIECE_SHIFT, PIECE_TAU, PIECE_VERTEX0, PIECE_VERTEX1,
                   DualPoint, active_pieces, is_xi_feasible, xi_threshold)
from .errors import DomainError, InfeasibleError, SolverFailureError

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class BreakLine:
    """Affine locus lambda2 = slope*lambda1 + intercept where a term changes branch."""

    family: str  # "U" or "L"
    index: int   # 1-based sample index
    slope: float
    intercept: float

    def value_at(self, lam1: float) -> float:
        return self.slope * lam1 + self.intercept


@dataclass(frozen=True)
class BoundResult:
    value: float
    argmin: DualPoint
    method: str           # "DD", "SM", or "OracleGrid"
    iterations: int
    xi_star: float


@dataclass
class PlaneResult:
    value: float
    lam1: float
    lam2: float
    iterations: int
    visits: int  # regions entered plus ray segments walked


def build_breaklines(kind: CostKind, xi: float, sample, tau: float) -> list[BreakLine]:
    """Branch-boundary lines of every Psi_i in the (lambda1, lambda2) plane."""
    if not is_xi_feasible(kind, xi):
        raise DomainError(f"xi = {xi} infeasible for {kind.name}")
    lines = []
    pts = sample.points
    if kind.order == 0:
        shift = 2.0 * math.sqrt(xi)
        l_intercept = -2.0 * xi * tau - shift if kind.is_lower else -2.0 * xi * tau + shift
        for i, x in enumerate(pts, start=1):
            lines.append(BreakLine("U", i, 2.0 * x, -2.0 * xi * tau))
            lines.append(BreakLine("L", i, 2.0 * x, l_intercept))
    else:
        if kind.order == 1:
            off = -0.5 if kind.is_lower else 0.5
        else:
            off = 0.0
        for i, x in enumerate(pts, start=1):
            lines.append(BreakLine("U", i, 2.0 * x, -2.0 * xi * tau + off))
    return lines


class _PlaneObjective:
    """Dual objective at fixed xi, with branch signatures and quadratic models."""

    def __init__(self, kind: CostKind, xi: float, problem: ProblemSpec):
        self.kind = kind
        self.xi = xi
        self.problem = problem
        self.x = problem.sample.as_array()
        self.x2 = self.x ** 2
        self.tau = problem.tau
        m2 = problem.moments.second_raw
        self.aff1 = problem.delta - m2 - float(np.mean(self.x2))
        self.aff2 = problem.moments.mu
        self.aff0 = xi * m2

    def value(self, lam1, lam2):
        lam1 = np.asarray(lam1, dtype=float)
        lam2 = np.asarray(lam2, dtype=float)
        scalar = lam1.ndim == 0
        l1 = np.atleast_1d(lam1)[:, None]
        l2 = np.atleast_1d(lam2)[:, None]
        b = l1 * self.x[None, :] - l2 / 2.0
        sup = _sup_array(self.kind, self.xi, b, self.tau)
        mean_sup = np.mean(sup, axis=1)
        out = (np.atleast_1d(lam1) * self.aff1 + np.atleast_1d(lam2) * self.aff2
               + self.aff0 + mean_sup)
        return float(out[0]) if scalar else out

    def signature(self, lam1: float, lam2: float) -> np.ndarray:
        b = lam1 * self.x - lam2 / 2.0
        return active_pieces(self.kind, self.xi, b, self.tau)

    def quadratic(self, pieces: np.ndarray):
        """Return (H, q, c) with F_sig(lam) = 0.5 lam'H lam + q'lam + c."""
        c2, c1, c0 = _piece_coeffs(self.kind, self.xi, self.tau, pieces)
        m_c2 = float(np.mean(c2))
        m_c2x = float(np.mean(c2 * self.x))
        m_c2x2 = float(np.mean(c2 * self.x2))
        m_c1 = float(np.mean(c1))
        m_c1x = float(np.mean(c1 * self.x))
        h = np.array([[2.0 * m_c2x2, -m_c2x], [-m_c2x, 0.5 * m_c2]])
        q = np.array([self.aff1 + m_c1x, self.aff2 - 0.5 * m_c1])
        c = self.aff0 + float(np.mean(c0))
        return h, q, c


def _sup_array(kind: CostKind, xi: float, b: np.ndarray, tau: float) -> np.ndarray:
    """Vectorized sup_g_compact over an array of b values at fixed xi.

    The -lambda1*x_i^2 part of each Psi_i is folded into the caller's affine
    term, so this returns only the envelope.
    """
    xv = b / xi
    vertex = -xi * xv * xv + 2.0 * b * xv
    if kind.order == 0:
        hit = (xv <= tau) if kind.is_lower else (xv >= tau)
        tau_piece = 1.0 + (-xi * tau * tau + 2.0 * b * tau)
        return np.maximum(tau_piece, hit + vertex)
    if kind.order == 1:
        quarter = 0.25 / xi
        gap = (tau - (xv - quarter)) if kind.is_lower else ((xv + quarter) - tau)
        return vertex + np.maximum(gap, 0.0)
    gap = np.maximum((tau - xv) if kind.is_lower else (xv - tau), 0.0)
    return vertex + (xi / (xi - 1.0)) * gap * gap


def _piece_coeffs(kind: CostKind, xi: float, tau: float, pieces: np.ndarray):
    """Quadratic-in-b coefficients (c2, c1, c0) of each active piece."""
    n = pieces.shape[0]
    c2 = np.zeros(n)
    c1 = np.zeros(n)
    c0 = np.zeros(n)
    vert = (pieces == PIECE_VERTEX0) | (pieces == PIECE_VERTEX1)
    c2[vert] = 1.0 / xi
    c0[pieces == PIECE_VERTEX1] = 1.0
    taup = pieces == PIECE_TAU
    c1[taup] = 2.0 * tau
    c0[taup] = 1.0 - xi * tau * tau
    shift = pieces == PIECE_SHIFT
    if shift.any():
        if kind.order == 1:
            c2[shift] = 1.0 / xi
            c1[shift] = (-1.0 if kind.is_lower else 1.0) / xi
            c0[shift] = 0.25 / xi + (tau if kind.is_lower else -tau)
        else:
            c2[shift] = 1.0 / (xi - 1.0)
            c1[shift] = -2.0 * tau / (xi - 1.0)
            c0[shift] = xi * tau * tau / (xi - 1.0)
    return c2, c1, c0


_UNBOUNDED_PLANE_MSG = ("dual objective unbounded below: no distribution matches "
                        "the moment targets within the given transport budget")


def _arrangement_vertices(lines: list[BreakLine]) -> np.ndarray:
    """Pairwise intersections on lambda1 >= 0 plus axis intercepts, deduplicated."""
    pts = []
    k = len(lines)
    for a in range(k):
        la = lines[a]
        for b in range(a + 1, k):
            lb = lines[b]
            dm = la.slope - lb.slope
            if dm == 0.0:
                continue
            l1 = (lb.intercept - la.intercept) / dm
            if l1 >= 0.0:
                pts.append((l1, la.value_at(l1)))
    for la in lines:
        pts.append((0.0, la.intercept))
    arr = np.array(pts)
    # Deduplicate within 1e-10 (relative to local magnitude).
    order = np.lexsort((arr[:, 1], arr[:, 0]))
    arr = arr[order]
    kept = [arr[0]]
    for p in arr[1:]:
        q = kept[-1]
        scale = 1.0 + abs(p[0]) + abs(p[1])
        if abs(p[0] - q[0]) > 1e-10 * scale or abs(p[1] - q[1]) > 1e-10 * scale:
            kept.append(p)
    return np.array(kept)


def dd_minimize_plane(kind: CostKind, xi: float, problem: ProblemSpec,
                      max_iter: int | None = None) -> PlaneResult:
    """Minimize the dual objective over (lambda1 >= 0, lambda2) at fixed xi."""
    if not is_xi_feasible(kind, xi):
        raise DomainError(f"xi = {xi} infeasible for {kind.name}")
    lines = build_breaklines(kind, xi, problem.sample, problem.tau)
    obj = _PlaneObjective(kind, xi, problem)
    n = problem.sample.n
    if max_iter is None:
        max_iter = 10 * (n * n + 2 * n) + 50

    slopes = np.array([l.slope for l in lines])
    intercepts = np.array([l.intercept for l in lines])

    verts = _arrangement_vertices(lines)
    vals = obj.value(verts[:, 0], verts[:, 1])
    best = int(np.argmin(vals))
    p = verts[best].copy()
    fp = float(vals[best])

    f_init = fp
    visits = 0
    iters = 0
    while iters < max_iter:
        iters += 1
        moved, p, fp, dv = _descent_step(obj, slopes, intercepts, p, fp)
        visits += dv
        if not moved:
            return PlaneResult(fp, float(p[0]), float(p[1]), iters, visits)
        if fp < -1e10 * (1.0 + abs(f_init)):
            raise InfeasibleError(_UNBOUNDED_PLANE_MSG)
    raise SolverFailureError(
        f"plane search exhausted {max_iter} iterations at xi={xi}",
        best=(float(p[0]), float(p[1]), fp))


def _line_distances(slopes, intercepts, p):
    return np.abs(p[1] - (slopes * p[0] + intercepts)) / np.sqrt(1.0 + slopes ** 2)


def _sector_angles(slopes, intercepts, p, on_boundary):
    scale = 1.0 + abs(p[0]) + abs(p[1])
    dist = _line_distances(slopes, intercepts, p)
    active = dist <= 1e-9 * scale
    angles = []
    for m in slopes[active]:
        th = math.atan2(m, 1.0)
        angles.extend((th, th + math.pi))
    if on_boundary:
        angles.extend((math.pi / 2.0, -math.pi / 2.0))
    angles = [math.atan2(math.sin(t), math.cos(t)) for t in angles]
    angles.sort()
    dedup = []
    for t in angles:
        if not dedup or t - dedup[-1] > 1e-12:
            dedup.append(t)
    if len(dedup) >= 2 and (dedup[-1] - dedup[0]) > 2.0 * math.pi - 1e-12:
        dedup.pop()
    nonactive = ~active
    local = float(dist[nonactive].min()) if nonactive.any() else scale
    return dedup, max(local, 1e-12 * scale)


def _descent_step(obj, slopes, intercepts, p, fp):
    """One accepted move (region jump or directional line search), or stop."""
    scale = 1.0 + abs(p[0]) + abs(p[1])
    on_boundary = p[0] <= 1e-15 * scale
    angles, local_scale = _sector_angles(slopes, intercepts, p, on_boundary)
    eps_probe = 1e-7 * local_scale
    tol_dec = 1e-12 * (1.0 + abs(fp))

    if not angles:
        sectors = [(-math.pi, math.pi)]
    else:
        sectors = [(angles[i], angles[(i + 1) % len(angles)] +
                    (2.0 * math.pi if i + 1 == len(angles) else 0.0))
                   for i in range(len(angles))]

    region_best = None
    ray_best = None
    for (ta, tb) in sectors:
        mid = 0.5 * (ta + tb)
        d_mid = np.array([math.cos(mid), math.sin(mid)])
        probe = p + eps_probe * d_mid if angles else p
        if probe[0] < 0.0:
            continue
        sig = obj.signature(probe[0], probe[1])
        h, q, _ = obj.quadratic(sig)

        cand = _region_jump(obj, slopes, intercepts, p, h, q)
        if cand is not None:
            fq, step, point = cand
            if fq < fp - tol_dec and (region_best is None or
                                      (fq, step) < (region_best[0], region_best[1])):
                region_best = (fq, step, point)

        grad = h @ p + q
        d = _best_sector_direction(grad, ta, tb, angles)
        if d is not None and (not on_boundary or d[0] >= -1e-15):
            res = _ray_search(obj, slopes, intercepts, p, d, scale)
            if res is not None:
                t_star, segs = res
                point = p + t_star * d
                if point[0] < 0.0:
                    point = point.copy()
                    point[0] = 0.0
                fq = obj.value(point[0], point[1])
                if fq < fp - tol_dec and (ray_best is None or
                                          (fq, t_star) < (ray_best[0], ray_best[1])):
                    ray_best = (fq, t_star, point, segs)

    if region_best is not None:
        fq, _, point = region_best
        return True, point, fq, 1
    if ray_best is not None:
        fq, _, point, segs = ray_best
        return True, point, fq, segs
    return False, p, fp, 0


def _region_jump(obj, slopes, intercepts, p, h, q):
    """Newton point of the sector quadratic, clipped at the first line crossing."""
    det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
    hnorm = abs(h[0, 0]) + abs(h[1, 1]) + abs(h[0, 1])
    if det <= 1e-14 * (hnorm ** 2 + 1e-300):
        return None
    target = np.array([-(q[0] * h[1, 1] - q[1] * h[0, 1]) / det,
                       -(h[0, 0] * q[1] - h[1, 0] * q[0]) / det])
    d = target - p
    step_len = float(np.hypot(d[0], d[1]))
    if step_len <= 1e-14 * (1.0 + np.hypot(p[0], p[1])):
        return None
    t_move = 1.0
    denom = d[1] - slopes * d[0]
    numer = slopes * p[0] + intercepts - p[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ts = numer / denom
    ts = ts[np.isfinite(ts)]
    ts = ts[(ts > 1e-9) & (ts < t_move)]
    if ts.size:
        t_move = float(ts.min())
    if d[0] < 0.0:
        t_axis = -p[0] / d[0]
        if 1e-9 < t_axis < t_move:
            t_move = t_axis
    point = p + t_move * d
    if point[0] < 0.0:
        point = point.copy()
        point[0] = 0.0
    fq = obj.value(point[0], point[1])
    return fq, t_move * step_len, point


def _best_sector_direction(grad, ta, tb, angles):
    """Direction of steepest descent within the closed sector arc, if any."""
    gnorm = float(np.hypot(grad[0], grad[1]))
    if gnorm <= 0.0:
        return None
    tol_slope = -1e-11 * (1.0 + gnorm)
    if not angles:
        return -grad / gnorm
    theta_g = math.atan2(-grad[1], -grad[0])
    for cand_theta in (theta_g, theta_g + 2.0 * math.pi):
        if ta <= cand_theta <= tb:
            return -grad / gnorm
    best = None
    for th in (ta, tb):
        d = np.array([math.cos(th), math.sin(th)])
        s = float(grad @ d)
        if s < tol_slope and (best is None or s < best[0]):
            best = (s, d)
    return None if best is None else best[1]


def _ray_search(obj, slopes, intercepts, p, d, scale):
    """Exact minimizer of the convex piecewise quadratic along p + t*d, t > 0."""
    denom = d[1] - slopes * d[0]
    numer = slopes * p[0] + intercepts - p[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ts = numer / denom
    ts = ts[np.isfinite(ts)]
    ts = list(ts[ts > 1e-12 * scale])
    if d[0] < 0.0:
        ts.append(-p[0] / d[0])
    ts = sorted(set(ts))
    t_lo = 0.0
    segs = 0
    t_limit = 1e14 * scale
    breakpoints = ts + [math.inf]
    for t_hi in breakpoints:
        segs += 1
        t_mid = t_lo + min((t_hi - t_lo) * 0.5, max(1e-7 * scale, 1e-7 * t_lo))
        probe = p + t_mid * d
        if probe[0] < 0.0:
            return (t_lo, segs) if t_lo > 0.0 else None
        sig = obj.signature(probe[0], probe[1])
        h, q, _ = obj.quadratic(sig)
        a_coef = float(d @ h @ d)
        b_coef = float(d @ (h @ p + q))
        slope_lo = a_coef * t_lo + b_coef
        if slope_lo >= 0.0:
            return (t_lo, segs) if t_lo > 0.0 else None
        if a_coef > 0.0:
            t_star = -b_coef / a_coef
            if t_star <= t_hi:
                return t_star, segs
        if not math.isfinite(t_hi) or t_hi > t_limit:
            raise InfeasibleError(_UNBOUNDED_PLANE_MSG)
        t_lo = t_hi
    return None


def solve_dd(problem: ProblemSpec, *, xi_tol: float = 1e-8,
             expansion_eps: float = 1e-8, max_doublings: int = 70) -> BoundResult:
    """Robust bound via plane minimization nested in a xi line search."""
    kind = problem.kind
    thr = xi_threshold(kind)
    cache: dict[float, PlaneResult] = {}
    evals = 0

    def f(xi: float) -> float:
        nonlocal evals
        if xi not in cache:
            cache[xi] = dd_minimize_plane(kind, xi, problem)
            evals += 1
        return cache[xi].value

    xs = [thr + expansion_eps]
    fs = [f(xs[0])]
    bracket = None
    for k in range(1, max_doublings + 1):
        xi_k = thr + expansion_eps * (2.0 ** k)
        fk = f(xi_k)
        if fk > fs[-1] + 1e-12 * (1.0 + abs(fk)):
            lo = xs[-2] if len(xs) >= 2 else thr + expansion_eps * 2.0 ** -20
            bracket = (lo, xi_k)
            break
        if abs(fk - fs[-1]) <= 1e-11 * (1.0 + abs(fk)) and k > 8:
            bracket = (xs[-1], xi_k)
            break
        xs.append(xi_k)
        fs.append(fk)
    if bracket is None:
        span = fs[0] - fs[-1]
        if span > 1e3 * (1.0 + abs(fs[0])):
            raise InfeasibleError("dual objective keeps decreasing as xi grows; "
                                  "the problem appears primal-infeasible")
        bracket = (xs[max(0, len(xs) - 2)], thr + expansion_eps * 2.0 ** max_doublings)

    lo, hi = bracket
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xi_tol * (1.0 + abs(hi)):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    xi_star = min(cache, key=lambda t: cache[t].value)
    plane = cache[xi_star]
    arg = DualPoint(plane.lam1, plane.lam2, xi_star - plane.lam1)
    return BoundResult(plane.value, arg, "DD", evals, xi_star)
