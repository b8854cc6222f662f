"""Classical sharp moment bounds given mean and variance only.

These are the no-ambiguity limits of the robust bounds: one-sided tail
probabilities (Chebyshev-Cantelli), expected shortfall/overage (Scarf/Lo
style), and one-sided second partial moments.  Each is exact (attained by
some distribution with the stated mean and variance).
"""

from __future__ import annotations

import math

from .core import CostKind, MomentSpec
from .errors import DomainError


def classical_bound(kind: CostKind, moments: MomentSpec, tau: float) -> float:
    """Sharp sup of E[cost] over distributions with the given mean/variance."""
    mu, sigma = moments.mu, moments.sigma
    if not sigma >= 0.0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    d = tau - mu if kind.is_lower else mu - tau
    if kind.order == 0:
        # Value-1 branch is closed: at tau == mu both tails give 1.
        if d >= 0.0:
            return 1.0
        return sigma ** 2 / (sigma ** 2 + d * d)
    if kind.order == 1:
        return (d + math.sqrt(sigma ** 2 + d * d)) / 2.0
    return max(d, 0.0) ** 2 + sigma ** 2
