"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves  max c'x  s.t.  A x = b, x >= 0  at the modest sizes this package
needs (a few constraint rows, up to a few thousand columns).  Bland's rule
(smallest eligible index for both entering and leaving choices) guarantees
termination on the degenerate transport LPs produced by the primal oracle.
"""

from __future__ import annotations

import numpy as np

from .errors import InfeasibleError, SolverFailureError


def simplex_max(c, a, b, *, tol: float = 1e-9, max_iter: int = 200_000):
    """Maximize c'x subject to a @ x = b, x >= 0.

    Returns (x, value).  Raises InfeasibleError when no feasible point
    exists and SolverFailureError on iteration exhaustion (should not occur
    with Bland's rule) or an unbounded ray.
    """
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = a.shape

    neg = b < 0.0
    a[neg] *= -1.0
    b[neg] *= -1.0

    # Tableau: structural columns, artificial columns, rhs.
    t = np.zeros((m, n + m + 1))
    t[:, :n] = a
    t[:, n:n + m] = np.eye(m)
    t[:, -1] = b
    basis = list(range(n, n + m))

    # Phase 1: minimize the artificial sum.
    rc = np.zeros(n + m)
    rc[:n] = -a.sum(axis=0)
    obj = float(b.sum())
    obj = _bland_iterate(t, rc, basis, obj, allowed=n + m, tol=tol, max_iter=max_iter)
    if obj > tol * (1.0 + abs(b).sum()):
        raise InfeasibleError("linear program infeasible (artificial residual "
                              f"{obj:.3e})")

    # Drive any leftover artificial out of the basis where possible.
    for row, var in enumerate(basis):
        if var >= n:
            cols = np.nonzero(np.abs(t[row, :n]) > tol)[0]
            if cols.size:
                _pivot(t, row, int(cols[0]), basis)
            else:
                t[row, :] = 0.0  # redundant constraint row

    # Phase 2: minimize -c'x over structural columns only.
    c_full = np.zeros(n + m)
    c_full[:n] = -c
    cb = c_full[basis]
    rc2 = c_full - cb @ t[:, :-1]
    rc2[n:] = np.inf  # artificials may never re-enter
    obj2 = float(cb @ t[:, -1])
    obj2 = _bland_iterate(t, rc2, basis, obj2, allowed=n, tol=tol, max_iter=max_iter)

    x = np.zeros(n + m)
    for row, var in enumerate(basis):
        x[var] = t[row, -1]
    return x[:n], -obj2


def _bland_iterate(t, rc, basis, obj, *, allowed, tol, max_iter):
    """Run Bland-rule pivots in place until the reduced costs are nonnegative."""
    m = t.shape[0]
    for _ in range(max_iter):
        entering = -1
        for j in range(allowed):
            if rc[j] < -tol:
                entering = j
                break
        if entering < 0:
            return obj
        col = t[:, entering]
        rows = np.nonzero(col > tol)[0]
        if rows.size == 0:
            raise SolverFailureError("linear program unbounded")
        ratios = t[rows, -1] / col[rows]
        best = ratios.min()
        # Bland: among minimal ratios pick the smallest basis variable.
        cand = rows[ratios <= best + tol * (1.0 + abs(best))]
        leave_row = min(cand, key=lambda r: basis[r])
        delta = rc[entering]
        _pivot(t, int(leave_row), entering, basis)
        # Update reduced costs: rc -= rc[entering] * pivot_row.
        rc -= delta * t[int(leave_row), :-1]
        rc[entering] = 0.0
        obj += delta * t[int(leave_row), -1]
    raise SolverFailureError(f"simplex exceeded {max_iter} pivots")


def _pivot(t, row: int, col: int, basis) -> None:
    t[row, :] /= t[row, col]
    for r in range(t.shape[0]):
        if r != row and t[r, col] != 0.0:
            t[r, :] -= t[r, col] * t[row, :]
    basis[row] = col
