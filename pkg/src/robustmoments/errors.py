"""Exception types shared across the package."""


class RobustMomentsError(Exception):
    """Base class for all package-specific errors."""


class DomainError(RobustMomentsError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class InfeasibleError(RobustMomentsError):
    """The requested problem admits no distribution (or no feasible LP point)."""


class SolverFailureError(RobustMomentsError):
    """A solver exhausted its iteration budget before certifying optimality.

    The best point found so far is attached as ``best`` when available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
