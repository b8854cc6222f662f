"""Closed-form suprema of `cost + quadratic` used by the dual objective.

For each cost kind this evaluates

    g(a, b) = sup_x [ cost(x) - a*x^2 + 2*b*x ]

in two algebraically equivalent ways: a branch form that follows the
case-by-case optimality analysis (and reports a maximizer), and a compact
one-line form used by the radial solver.  Zeroth/first-order kinds need
a > 0; second-order kinds need a > 1 (the envelope diverges as a -> 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import CostKind, cost_value
from .errors import DomainError


def g0(x: float, a: float, b: float) -> float:
    """The quadratic part -a*x^2 + 2*b*x."""
    return -a * x * x + 2.0 * b * x


def _check_curvature(kind: CostKind, a: float) -> None:
    if kind.order == 2:
        if not a > 1.0:
            raise DomainError(f"{kind.name} envelope needs a > 1, got a={a}")
    elif not a > 0.0:
        raise DomainError(f"{kind.name} envelope needs a > 0, got a={a}")


@dataclass(frozen=True)
class SupremumResult:
    value: float
    argmax: float


def sup_g_branch(kind: CostKind, a: float, b: float, tau: float) -> SupremumResult:
    """Branch-form supremum with the attaining point.

    When the supremum is attained at two points (a boundary tie between
    branches) the reported argmax is the one nearer tau.
    """
    _check_curvature(kind, a)
    xv = b / a
    side, order = kind.side, kind.order

    if order == 0:
        if side == "L":
            if tau >= xv:
                return SupremumResult(1.0 + g0(xv, a, b), xv)
            if tau > xv - 1.0 / math.sqrt(a):
                return SupremumResult(1.0 + g0(tau, a, b), tau)
            value = g0(xv, a, b)
        else:
            if tau <= xv:
                return SupremumResult(1.0 + g0(xv, a, b), xv)
            if tau < xv + 1.0 / math.sqrt(a):
                return SupremumResult(1.0 + g0(tau, a, b), tau)
            value = g0(xv, a, b)
        # Outermost branch: the jump candidate at tau ties exactly on the
        # boundary; prefer it there (it is the point nearer tau).
        if 1.0 + g0(tau, a, b) == value:
            return SupremumResult(value, tau)
        return SupremumResult(value, xv)

    # First/second-order values are factored as vertex value plus a hinge
    # term, which is algebraically identical to the per-branch closed forms
    # (e.g. tau + (b - 1/2)^2 / a) but shares every float operation with
    # `sup_g_compact`, keeping the two paths bit-for-bit comparable.
    if order == 1:
        quarter = 1.0 / (4.0 * a)
        if side == "L":
            if tau <= xv - quarter:
                return SupremumResult(g0(xv, a, b), xv)
            return SupremumResult(g0(xv, a, b) + (tau - (xv - quarter)),
                                  xv - 1.0 / (2.0 * a))
        if tau >= xv + quarter:
            return SupremumResult(g0(xv, a, b), xv)
        return SupremumResult(g0(xv, a, b) + ((xv + quarter) - tau),
                              xv + 1.0 / (2.0 * a))

    # order == 2: the two branches join smoothly at tau == xv.
    on_vertex = (tau <= xv) if side == "L" else (tau >= xv)
    if on_vertex:
        return SupremumResult(g0(xv, a, b), xv)
    gap = (tau - xv) if side == "L" else (xv - tau)
    return SupremumResult(g0(xv, a, b) + (a / (a - 1.0)) * gap * gap,
                          (b - tau) / (a - 1.0))


def sup_g_compact(kind: CostKind, a: float, b: float, tau: float) -> float:
    """Compact-form supremum (same value as `sup_g_branch`)."""
    _check_curvature(kind, a)
    xv = b / a
    side, order = kind.side, kind.order

    if order == 0:
        hit = (xv <= tau) if side == "L" else (xv >= tau)
        return max(1.0 + g0(tau, a, b), (1.0 if hit else 0.0) + g0(xv, a, b))
    if order == 1:
        quarter = 1.0 / (4.0 * a)
        gap = (tau - (xv - quarter)) if side == "L" else ((xv + quarter) - tau)
        return g0(xv, a, b) + max(gap, 0.0)
    gap = (tau - xv) if side == "L" else (xv - tau)
    g = max(gap, 0.0)
    return g0(xv, a, b) + (a / (a - 1.0)) * g * g


def sup_objective(kind: CostKind, a: float, b: float, tau: float, x: float) -> float:
    """The objective cost(x) + g0(x) whose supremum the lemmas evaluate."""
    return float(cost_value(kind, tau, x)) + g0(x, a, b)
