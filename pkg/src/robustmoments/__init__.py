"""Data-driven distributionally robust moment bounds in one dimension.

Computes sharp worst-case tail probabilities, expected shortfall/overage,
and semideviation for a random variable whose distribution has a fixed mean
and variance and lies within a Wasserstein ball (squared-distance cost)
around an empirical sample.  Two independent solvers (directional descent
and a spherical grid search), the classical no-ambiguity limits, a primal
linear-programming oracle, and the radius/confidence calibration are
provided; see README.md for the command-line interface.
"""

from .calibration import confidence_to_delta, delta_to_alpha, support_radius, w2_empirical
from .classical import classical_bound
from .core import (CostKind, EmpiricalSample, MomentSpec, ProblemSpec, cost_value,
                   empirical_moments, empirical_partial_moment, quantile)
from .descent import BoundResult, BreakLine, build_breaklines, dd_minimize_plane, solve_dd
from .dual import DualPoint, dual_value, psi_i, subgradient_box, xi_threshold
from .errors import DomainError, InfeasibleError, RobustMomentsError, SolverFailureError
from .spherical import GridSpec, SphericalPoint, radial_minimize, solve_sm, spherical_to_dual
from .suprema import SupremumResult, g0, sup_g_branch, sup_g_compact

__version__ = "0.1.0"

__all__ = [
    "BoundResult", "BreakLine", "CostKind", "DomainError", "DualPoint",
    "EmpiricalSample", "GridSpec", "InfeasibleError", "MomentSpec",
    "ProblemSpec", "RobustMomentsError", "SolverFailureError", "SphericalPoint",
    "SupremumResult", "build_breaklines", "classical_bound", "confidence_to_delta",
    "cost_value", "dd_minimize_plane", "delta_to_alpha", "dual_value",
    "empirical_moments", "empirical_partial_moment", "g0", "psi_i", "quantile",
    "radial_minimize", "solve_dd", "solve_sm", "spherical_to_dual",
    "subgradient_box", "sup_g_branch", "sup_g_compact", "support_radius",
    "w2_empirical", "xi_threshold",
]
