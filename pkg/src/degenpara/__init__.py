"""Crank-Nicolson scheme for degenerate parabolic equations on [0, 1].

The equation ``u_t = (A u_x)_x + B u_x + C u + F`` may lose its diffusion at
either end.  Where it does, the scheme needs no artificial boundary
condition: the endpoint row discretises the degenerate equation itself.
"""

from .coefficients import (
    INITIAL_PROFILES,
    PRESETS,
    AsianParams,
    BoundaryCase,
    CoefficientField,
    Problem,
    ThetaBlend,
    asian_problem,
    classify_boundary,
    make_preset,
)
from .diagnostics import boundary_ode_check, energy_series, gronwall_check
from .errors import (
    ClassificationError,
    ConfigurationError,
    DegenParaError,
    DomainError,
    PreconditionError,
    SolverError,
    StabilityError,
)
from .grid import Grid, GridFunction
from .scheme import Solution, check_stability, solve
from .weakform import refinement_study

__version__ = "0.1.0"

__all__ = [
    "INITIAL_PROFILES",
    "PRESETS",
    "AsianParams",
    "BoundaryCase",
    "ClassificationError",
    "CoefficientField",
    "ConfigurationError",
    "DegenParaError",
    "DomainError",
    "Grid",
    "GridFunction",
    "PreconditionError",
    "Problem",
    "Solution",
    "SolverError",
    "StabilityError",
    "ThetaBlend",
    "asian_problem",
    "boundary_ode_check",
    "check_stability",
    "classify_boundary",
    "energy_series",
    "gronwall_check",
    "make_preset",
    "refinement_study",
    "solve",
]
