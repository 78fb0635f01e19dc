"""Exception hierarchy shared by all modules."""


class ErgmPhaseError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ErgmPhaseError, ValueError):
    """An argument lies outside the domain of the function."""


class ConvergenceError(ErgmPhaseError, RuntimeError):
    """An iterative solver or quadrature did not reach its tolerance."""


class BracketError(ConvergenceError):
    """No sign-changing bracket could be established."""


class SingularCoefficientError(ErgmPhaseError, ArithmeticError):
    """A Laplace coefficient needed for the regime vanishes."""


class DegenerateError(ErgmPhaseError, ArithmeticError):
    """Two maximizers are too close for a ratio formula to be reliable."""


class ResourceError(ErgmPhaseError, MemoryError):
    """The requested problem size exceeds the configured cap."""
