"""Dual objective of the robust moment problems.

The worst-case primal value equals the infimum over multipliers
(lambda1 >= 0, lambda2, lambda3) of

    F(lambda) = lambda1*delta + lambda2*mu + lambda3*(mu^2 + sigma^2)
                + (1/n) * sum_i Psi_i(lambda)

where each Psi_i is a pointwise supremum that reduces to the closed forms in
`suprema` through a = xi := lambda1 + lambda3 and b_i = lambda1*x_i -
lambda2/2.  Feasibility (finiteness of every Psi_i) requires xi > 0 for
zeroth/first-order kinds and xi > 1 for second-order kinds; infeasible points
evaluate to +inf rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CostKind, ProblemSpec
from .errors import DomainError
from .suprema import sup_g_compact

# Piece codes for the active branch of one Psi_i term.
PIECE_VERTEX0 = 0   # vertex of the quadratic, no indicator contribution
PIECE_VERTEX1 = 1   # vertex of the quadratic, indicator active (ZPM only)
PIECE_TAU = 2       # ZPM middle branch, maximizer pinned at tau
PIECE_SHIFT = 3     # kind-specific second branch (FPM shifted vertex / SPM)


@dataclass(frozen=True)
class DualPoint:
    """Multipliers of the Wasserstein budget, the mean, and the raw second moment."""

    lambda1: float
    lambda2: float
    lambda3: float

    def __post_init__(self):
        if not self.lambda1 >= 0.0:
            raise DomainError(f"lambda1 must be >= 0, got {self.lambda1}")

    @property
    def xi(self) -> float:
        return self.lambda1 + self.lambda3

    def as_array(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2, self.lambda3], dtype=float)


def xi_threshold(kind: CostKind) -> float:
    """Feasibility cutoff for xi = lambda1 + lambda3 (shared by both solvers)."""
    return 1.0 if kind.order == 2 else 0.0


def is_xi_feasible(kind: CostKind, xi: float) -> bool:
    return xi > xi_threshold(kind)


def psi_i(kind: CostKind, point: DualPoint, x_i: float, tau: float) -> float:
    """One supremum term of the dual objective; +inf when xi is infeasible."""
    xi = point.xi
    if not is_xi_feasible(kind, xi):
        return math.inf
    b = point.lambda1 * x_i - point.lambda2 / 2.0
    return -point.lambda1 * x_i * x_i + sup_g_compact(kind, xi, b, tau)


def dual_value(kind: CostKind, point: DualPoint, problem: ProblemSpec) -> float:
    """F at one dual point; +inf exactly when xi-feasibility fails."""
    if kind is not problem.kind:
        raise ValueError(f"kind mismatch: {kind} vs problem {problem.kind}")
    vals = dual_value_many(problem,
                           np.array([point.lambda1]),
                           np.array([point.lambda2]),
                           np.array([point.lambda3]))
    return float(vals[0])


def dual_value_many(problem: ProblemSpec, lam1, lam2, lam3) -> np.ndarray:
    """Vectorized F over arrays of multipliers (shapes broadcast together).

    Returns +inf entries for xi-infeasible points.  Summation over sample
    terms uses numpy's fixed-order pairwise sum, so results are reproducible
    regardless of how callers parallelize over points.
    """
    lam1 = np.asarray(lam1, dtype=float)
    lam2 = np.asarray(lam2, dtype=float)
    lam3 = np.asarray(lam3, dtype=float)
    lam1, lam2, lam3 = np.broadcast_arrays(lam1, lam2, lam3)
    shape = lam1.shape
    lam1 = lam1.ravel()
    lam2 = lam2.ravel()
    lam3 = lam3.ravel()

    kind = problem.kind
    x = problem.sample.as_array()
    tau = problem.tau
    m2 = problem.moments.second_raw

    xi = lam1 + lam3
    feas = xi > xi_threshold(kind)
    out = np.full(lam1.shape, np.inf)
    if feas.any():
        l1 = lam1[feas][:, None]
        l2 = lam2[feas][:, None]
        a = xi[feas][:, None]
        b = l1 * x[None, :] - l2 / 2.0
        sup = _sup_compact_array(kind, a, b, tau)
        psi_mean = np.mean(-l1 * x[None, :] ** 2 + sup, axis=1)
        out[feas] = (lam1[feas] * problem.delta
                     + lam2[feas] * problem.moments.mu
                     + lam3[feas] * m2
                     + psi_mean)
    return out.reshape(shape)


def _sup_compact_array(kind: CostKind, a, b, tau: float) -> np.ndarray:
    """Vectorized `sup_g_compact` (a broadcastable against b; all feasible).

    Uses the same float factoring as the scalar path so the two agree
    bit-for-bit term by term.
    """
    xv = b / a
    vertex = -a * xv * xv + 2.0 * b * xv
    if kind.order == 0:
        hit = (xv <= tau) if kind.is_lower else (xv >= tau)
        tau_piece = 1.0 + (-a * tau * tau + 2.0 * b * tau)
        return np.maximum(tau_piece, hit + vertex)
    if kind.order == 1:
        quarter = 0.25 / a
        gap = (tau - (xv - quarter)) if kind.is_lower else ((xv + quarter) - tau)
        return vertex + np.maximum(gap, 0.0)
    gap = np.maximum((tau - xv) if kind.is_lower else (xv - tau), 0.0)
    return vertex + (a / (a - 1.0)) * gap * gap


def active_pieces(kind: CostKind, xi: float, b, tau: float) -> np.ndarray:
    """Piece codes of the active branch for each b (vectorized, xi feasible)."""
    b = np.asarray(b, dtype=float)
    xv = b / xi
    if kind.order == 0:
        if kind.is_lower:
            vertex_hit = tau >= xv
            tau_mid = tau > xv - 1.0 / math.sqrt(xi)
        else:
            vertex_hit = tau <= xv
            tau_mid = tau < xv + 1.0 / math.sqrt(xi)
        return np.where(vertex_hit, PIECE_VERTEX1,
                        np.where(tau_mid, PIECE_TAU, PIECE_VERTEX0))
    if kind.order == 1:
        on_vertex = (tau <= xv - 0.25 / xi) if kind.is_lower else (tau >= xv + 0.25 / xi)
    else:
        on_vertex = (tau <= xv) if kind.is_lower else (tau >= xv)
    return np.where(on_vertex, PIECE_VERTEX0, PIECE_SHIFT)


def piece_maximizer(kind: CostKind, xi: float, b, tau: float, pieces) -> np.ndarray:
    """Maximizer x*_i of each supremum term given its active piece code."""
    b = np.asarray(b, dtype=float)
    pieces = np.asarray(pieces)
    xv = b / xi
    if kind.order == 0:
        shift = xv  # unused placeholder for ZPM
    elif kind.order == 1:
        shift = xv - 0.5 / xi if kind.is_lower else xv + 0.5 / xi
    else:
        shift = (b - tau) / (xi - 1.0)
    out = np.where(pieces == PIECE_TAU, tau, np.where(pieces == PIECE_SHIFT, shift, xv))
    return out


def dual_gradient(kind: CostKind, point: DualPoint, problem: ProblemSpec) -> np.ndarray:
    """Gradient of F at a point where every term is smooth (by envelope rule:
    dPsi_i = (-(x*-x_i)^2, -x*, -x*^2))."""
    xi = point.xi
    x = problem.sample.as_array()
    b = point.lambda1 * x - point.lambda2 / 2.0
    pieces = active_pieces(kind, xi, b, problem.tau)
    xstar = piece_maximizer(kind, xi, b, problem.tau, pieces)
    g1 = problem.delta - np.mean((xstar - x) ** 2)
    g2 = problem.moments.mu - np.mean(xstar)
    g3 = problem.moments.second_raw - np.mean(xstar ** 2)
    return np.array([g1, g2, g3])


def subgradient_box(kind: CostKind, point: DualPoint, problem: ProblemSpec,
                    rel_step: float = 1e-9) -> np.ndarray:
    """Per-coordinate [left, right] directional derivatives of F.

    Each side is computed from the branch signature just off the point in
    that coordinate direction, so left == right on smooth regions and
    left <= right across a breakline.  Raises for xi-infeasible points.
    """
    if not is_xi_feasible(kind, point.xi):
        raise DomainError(f"xi = {point.xi} is infeasible for {kind.name}")
    lam = point.as_array()
    slack = point.xi - xi_threshold(kind)
    box = np.empty((3, 2))
    for j in range(3):
        h = rel_step * (1.0 + abs(lam[j]))
        if j != 1:
            h = min(h, 0.45 * slack)  # stay on the feasible side of the xi cutoff
        for col, sgn in ((0, -1.0), (1, +1.0)):
            shifted = lam.copy()
            shifted[j] += sgn * h
            box[j, col] = _one_sided_partial(kind, lam, shifted, problem, j)
    return box


def _one_sided_partial(kind: CostKind, lam: np.ndarray, probe: np.ndarray,
                       problem: ProblemSpec, j: int) -> float:
    """Partial derivative at `lam` of the branch active at `probe`.

    The branch is identified just off the point so ties resolve to the side
    being approached; the envelope gradient itself is evaluated at the point,
    making left and right coincide exactly on smooth regions.
    """
    x = problem.sample.as_array()
    b_probe = probe[0] * x - probe[1] / 2.0
    pieces = active_pieces(kind, probe[0] + probe[2], b_probe, problem.tau)
    b = lam[0] * x - lam[1] / 2.0
    xstar = piece_maximizer(kind, lam[0] + lam[2], b, problem.tau, pieces)
    if j == 0:
        return float(problem.delta - np.mean((xstar - x) ** 2))
    if j == 1:
        return float(problem.moments.mu - np.mean(xstar))
    return float(problem.moments.second_raw - np.mean(xstar ** 2))
