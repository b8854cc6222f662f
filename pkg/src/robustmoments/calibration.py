"""Empirical transport distances and the ambiguity-radius/confidence map.

The concentration relation used here bounds the probability that the
distance between the true distribution and the empirical measure on n
points exceeds delta:

    alpha(delta) = exp(-n * (8r - 2*sqrt(16r^2 + 16r*delta + 24r + 12*delta + 9)
                             + 4*delta + 6) / (3 + 4r))

with r the radius of the support.  At delta = 0 the square root collapses to
(4r + 3) and alpha is exactly 1; alpha is strictly decreasing in delta.
Inverting alpha at a target confidence beta = 1 - alpha gives the radius to
feed the robust solvers.
"""

from __future__ import annotations

import math

import numpy as np

from .core import EmpiricalSample
from .errors import DomainError


def w2_empirical(a: EmpiricalSample, b: EmpiricalSample) -> float:
    """Order-2 transport distance between equal-size empirical samples.

    Sorted matching is optimal in one dimension; the 1/n weight makes this
    the expected squared displacement under the optimal coupling, to the
    power 1/2.
    """
    if a.n != b.n:
        raise DomainError(f"samples must have equal size, got {a.n} and {b.n}")
    xa = a.as_array()
    xb = b.as_array()
    return float(np.sqrt(np.mean((xa - xb) ** 2)))


def delta_to_alpha(n: int, r: float, delta: float) -> float:
    """Tail probability of the empirical distance exceeding delta."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not r > 0.0:
        raise DomainError(f"support radius must be > 0, got {r}")
    if not delta >= 0.0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    root = math.sqrt(16.0 * r * r + 16.0 * r * delta + 24.0 * r + 12.0 * delta + 9.0)
    exponent = -n * (8.0 * r - 2.0 * root + 4.0 * delta + 6.0) / (3.0 + 4.0 * r)
    return min(math.exp(exponent), 1.0)


def confidence_to_delta(n: int, r: float, beta: float) -> float:
    """Radius delta at which the confidence of staying inside reaches beta.

    Solves delta_to_alpha(n, r, delta) = 1 - beta by bisection.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    alpha_target = 1.0 - beta
    lo = 0.0
    hi = 1.0
    while delta_to_alpha(n, r, hi) > alpha_target:
        hi *= 2.0
        if hi > 1e18:
            raise DomainError("confidence level unreachable (alpha floor hit)")
    while hi - lo > 1e-9 * (1.0 + hi):
        mid = 0.5 * (lo + hi)
        if delta_to_alpha(n, r, mid) > alpha_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def support_radius(sample: EmpiricalSample) -> float:
    """Default support radius: the farthest sample point from the mean."""
    x = sample.as_array()
    return float(np.max(np.abs(x - x.mean())))
