"""Errors raised by the recurrence toolkit."""

from typing import Any, Dict, Optional, Tuple


class RevivalsError(Exception):
    """Base error carrying the offending parameters."""

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.details: Dict[str, Any] = details

    def __str__(self) -> str:
        message = super().__str__()
        if not self.details:
            return message
        params = ", ".join(f"{key}={value!r}" for key, value in self.details.items())
        return f"{message} ({params})"


class DomainError(RevivalsError, ValueError):
    """Error to indicate an input outside the mathematical domain."""


class RangeError(RevivalsError, ArithmeticError):
    """Error to indicate a result that cannot be represented in 64-bit floats."""


class ConvergenceError(RevivalsError):
    """Error to indicate a truncated eigenproblem did not converge."""


class AmbiguityError(RevivalsError):
    """Error to indicate two Mathieu branches compete for the same index."""

    def __init__(
        self, message: str, candidates: Tuple[float, float], **details: Any
    ) -> None:
        super().__init__(message, candidates=candidates, **details)
        self.candidates = candidates


class DegenerateSpectrumError(RevivalsError):
    """Error to indicate a linear spectrum where a nonlinearity is required."""


class SingularityError(RevivalsError):
    """Error to indicate a perturbative denominator vanishes."""


class DetuningSingularityError(SingularityError):
    """Error to indicate the orbital frequency sits exactly on resonance."""


class ResonanceSingularityError(SingularityError):
    """Error to indicate mu squared equals one."""


class RegimeError(RevivalsError):
    """Error to indicate an exponent outside the bound-state regimes."""


class SpanError(RevivalsError):
    """Error to indicate pendulum eigenvectors reach the matrix edge."""


class DomainSizeError(DomainError):
    """Error to indicate the grid is too small for the requested levels."""

    def __init__(
        self, message: str, suggested_x_max: Optional[float] = None, **details: Any
    ) -> None:
        super().__init__(message, suggested_x_max=suggested_x_max, **details)
        self.suggested_x_max = suggested_x_max


class TruncationError(RevivalsError):
    """Error to indicate a wave packet is cut off by the finite basis."""


class StabilityError(RevivalsError):
    """Error to indicate the propagator lost unitarity."""


class BoundaryReflectionError(DomainError):
    """Error to indicate probability reached the edge of the grid."""


class GridMismatchError(RevivalsError):
    """Error to indicate states living on different grids were combined."""


class ConfigError(RevivalsError):
    """Error to indicate an invalid experiment configuration."""


class NumericalError(RevivalsError):
    """Error to indicate a linear algebra or floating point failure in a library call."""
