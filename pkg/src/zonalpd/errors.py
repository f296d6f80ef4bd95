"""Exception hierarchy shared by all modules."""


class ZonalPDError(Exception):
    """Base class for library errors."""


class DomainError(ZonalPDError, ValueError):
    """Argument outside the domain of a function (e.g. |x| > 1)."""


class ParameterError(ZonalPDError, ValueError):
    """Invalid parameter combination."""


class QuadratureError(ZonalPDError, RuntimeError):
    """Adaptive quadrature did not reach its tolerance."""

    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class ResolutionError(ZonalPDError, ValueError):
    """Sample grid too coarse for the requested computation."""


class SmoothnessError(ZonalPDError, ValueError):
    """Finite-difference derivative estimates do not settle."""


class BracketError(ZonalPDError, RuntimeError):
    """No sign change found while bracketing a root."""


class PoisednessError(ZonalPDError, RuntimeError):
    """Interpolation system is not uniquely solvable."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
