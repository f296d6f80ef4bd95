"""Positive definite zonal kernels on spheres: Gegenbauer tools, truncated-power
kernels, positivity scans, a convexity criterion and kernel interpolation."""

from . import conjecture_lab, gegenbauer, polya, sphere, truncated_power
from .errors import (BracketError, DomainError, ParameterError, PoisednessError, QuadratureError,
                     ResolutionError, SmoothnessError, ZonalPDError)

__version__ = "0.1.0"

__all__ = [
    "conjecture_lab", "gegenbauer", "polya", "sphere", "truncated_power",
    "BracketError", "DomainError", "ParameterError", "PoisednessError", "QuadratureError",
    "ResolutionError", "SmoothnessError", "ZonalPDError",
]
