"""Exception and warning types raised across the package."""


class OscPolyError(Exception):
    """Base class for all package errors."""


class DomainError(OscPolyError, ValueError):
    """Arguments fall outside the region where a formula is defined."""


class PrecisionError(OscPolyError, ValueError):
    """Requested working precision is below the supported floor."""


class SingularityError(DomainError):
    """Evaluation hits a singular point of the weight factor."""


class ToleranceError(OscPolyError, ArithmeticError):
    """Adaptive refinement hit its depth or panel limit before converging."""


class ConvergenceError(OscPolyError, ArithmeticError):
    """An iterative solver failed to converge inside its bracket."""


class RangeError(DomainError):
    """Target value lies outside the range of a monotone map."""


class InputError(OscPolyError, ValueError):
    """Malformed request, e.g. a degenerate grid size."""


class NormalizationWarning(UserWarning):
    """The weighted L2 norm is undefined for these parameters (alpha <= -(k+1)/2)."""
