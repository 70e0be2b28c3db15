"""
Exception hierarchy.

Validation problems (bad parameters, malformed symbols, unsupported
dimensions) map to CLI exit code 1; numerical failures (divergence,
no convergence, Gamma overflow) map to exit code 2.
"""
from typing import Optional, Sequence


class FockopError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(FockopError, ValueError):
    exit_code = 1


class ParameterError(ValidationError):
    pass


class UnsupportedDimensionError(ValidationError):
    pass


class SymbolParseError(ValidationError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class SymbolArityError(SymbolParseError):
    pass


class NumericalError(FockopError, ArithmeticError):
    exit_code = 2


class RangeError(NumericalError):
    pass


class MomentRangeError(RangeError):
    def __init__(self, degree: int, detail: str = ""):
        message = f"moment overflow at total degree {degree}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
        self.degree = degree


class ConvergenceError(NumericalError):
    pass


class DivergenceError(NumericalError):
    def __init__(self, message: str, location: Optional[Sequence[complex]] = None):
        if location is not None:
            coords = ", ".join(f"{complex(c):.6g}" for c in location)
            message = f"{message} at node ({coords})"
        super().__init__(message)
        self.location = location


class GrowthError(DivergenceError):
    pass
