"""Exact and asymptotic analysis of the directed edge/p-star random graph model."""

from .errors import (
    BracketError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    ErgmPhaseError,
    ResourceError,
    SingularCoefficientError,
)
from .model import (
    ModelParams,
    PhaseClassification,
    Regime,
    critical_point,
    ell,
    ell_deriv,
    find_maximizers,
)

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "ConvergenceError",
    "DegenerateError",
    "DomainError",
    "ErgmPhaseError",
    "ModelParams",
    "PhaseClassification",
    "Regime",
    "ResourceError",
    "SingularCoefficientError",
    "critical_point",
    "ell",
    "ell_deriv",
    "find_maximizers",
]
