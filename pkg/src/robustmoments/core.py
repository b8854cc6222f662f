"""Problem vocabulary: partial-moment cost kinds, moment targets, samples.

A robust moment problem asks for the worst-case expectation of one of six
partial-moment cost functions over all distributions that match a fixed mean
and variance and stay within a Wasserstein budget (squared-distance cost) of
an empirical sample.  This module holds the shared data types and the
empirical statistics they are compared against.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError


class CostKind(enum.Enum):
    """The six partial-moment cost functions, keyed by (side, order).

    Naming: L/U = lower/upper tail, Z/F/S = zeroth/first/second partial
    moment.  Zeroth-order costs are tail indicators (values in [0, 1]);
    first/second-order costs are hinge and squared-hinge losses (>= 0).
    """

    LZPM = ("L", 0)
    UZPM = ("U", 0)
    LFPM = ("L", 1)
    UFPM = ("U", 1)
    LSPM = ("L", 2)
    USPM = ("U", 2)

    @property
    def side(self) -> str:
        return self.value[0]

    @property
    def order(self) -> int:
        return self.value[1]

    @property
    def is_lower(self) -> bool:
        return self.value[0] == "L"

    @classmethod
    def from_name(cls, name: str) -> "CostKind":
        try:
            return cls[name.upper()]
        except KeyError:
            raise DomainError(f"unknown cost kind {name!r}") from None


def cost_value(kind: CostKind, tau: float, x) -> np.ndarray | float:
    """Evaluate the cost function of `kind` with threshold `tau` at x.

    Vectorized over x.  Tail indicators use the closed conventions
    x <= tau (lower) and x >= tau (upper), so a point equal to tau is
    counted by both tails.
    """
    x = np.asarray(x, dtype=float)
    t = (tau - x) if kind.is_lower else (x - tau)
    if kind.order == 0:
        out = (t >= 0.0).astype(float)
    elif kind.order == 1:
        out = np.maximum(t, 0.0)
    else:
        out = np.maximum(t, 0.0) ** 2
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MomentSpec:
    """First moment and standard deviation; the second raw moment is derived."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0.0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")

    @property
    def second_raw(self) -> float:
        return self.mu * self.mu + self.sigma * self.sigma


@dataclass(frozen=True)
class EmpiricalSample:
    """A nonempty sample with uniform weights 1/n, stored sorted ascending."""

    points: tuple

    def __init__(self, points: Iterable[float]):
        pts = tuple(sorted(float(p) for p in points))
        if not pts:
            raise DomainError("sample must contain at least one point")
        if not all(math.isfinite(p) for p in pts):
            raise DomainError("sample points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


@dataclass(frozen=True)
class ProblemSpec:
    """One robust moment problem instance.

    `delta` is the Wasserstein budget measured in squared data units, because
    the transport cost between points is the squared distance (x - y)^2.
    """

    kind: CostKind
    tau: float
    moments: MomentSpec
    sample: EmpiricalSample
    delta: float

    def __post_init__(self):
        if not self.delta >= 0.0:
            raise DomainError(f"delta must be >= 0, got {self.delta}")


def empirical_moments(sample: EmpiricalSample) -> MomentSpec:
    """Population-normalized (1/n) mean and standard deviation of a sample."""
    x = sample.as_array()
    mu = float(x.mean())
    sigma = float(np.sqrt(((x - mu) ** 2).mean()))
    return MomentSpec(mu=mu, sigma=sigma)


def empirical_partial_moment(sample: EmpiricalSample, kind: CostKind, tau: float) -> float:
    """Average of the cost function over the sample (its value under Q_n)."""
    return float(np.mean(cost_value(kind, tau, sample.as_array())))


def quantile(sample: EmpiricalSample, p: float) -> float:
    """Midpoint-interpolation sample quantile.

    Uses the plotting position p*n + 0.5 on the sorted points with linear
    interpolation, clamped to [1, n].  (Matches the convention behind the
    reference quantile tables this library is validated against.)
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"quantile level must lie in [0, 1], got {p}")
    x = sample.as_array()
    n = sample.n
    pos = p * n + 0.5
    pos = min(max(pos, 1.0), float(n))
    lo = int(math.floor(pos))
    hi = min(lo + 1, n)
    frac = pos - lo
    return float(x[lo - 1] * (1.0 - frac) + x[hi - 1] * frac)


def sample_from_values(values: Sequence[float]) -> EmpiricalSample:
    """Convenience constructor mirroring EmpiricalSample(...)."""
    return EmpiricalSample(values)
