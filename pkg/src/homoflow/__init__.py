"""Homogeneous axisymmetric stationary Navier-Stokes flows: profiles, fields, forces, stability."""

__version__ = "0.1.0"

from .errors import (AxisError, BlowUp, CFLViolation, DomainError, HomoflowError,  # noqa: E402
                     MismatchedHistories, NonConvergence, NonFiniteState, PoleError, QuadFailure)
from .numerics import Tolerance  # noqa: E402
from .profile import (GammaBounds, ProfileSolution, ProfileSolver, SolutionParams,  # noqa: E402
                      gamma_bounds, solve_profile)
from .field import FieldSampler, Point  # noqa: E402

__all__ = [
    "AxisError", "BlowUp", "CFLViolation", "DomainError", "HomoflowError", "MismatchedHistories",
    "NonConvergence", "NonFiniteState", "PoleError", "QuadFailure", "Tolerance", "GammaBounds",
    "ProfileSolution", "ProfileSolver", "SolutionParams", "gamma_bounds", "solve_profile",
    "FieldSampler", "Point",
]
