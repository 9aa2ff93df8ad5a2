"""
Exception hierarchy and CLI exit codes.
"""
from enum import IntEnum
from typing import List, Optional, Tuple


class ExitCode(IntEnum):
    SUCCESS = 0
    BEST_MATCH = 2
    INPUT = 3
    RANGE = 4
    NUMERIC = 5
    INSUFFICIENT_DATA = 6


class AdiasearchError(Exception):
    """Base class for every error raised by the package."""

    exit_code = ExitCode.INPUT


class InputError(AdiasearchError):
    """Unreadable or malformed input."""

    exit_code = ExitCode.INPUT


class DatabaseValidationError(InputError, ValueError):
    """A database violates its invariants; the message names the offending entry."""


class RangeError(AdiasearchError, ValueError):
    """A parameter lies outside the range an operation accepts."""

    exit_code = ExitCode.RANGE


class DomainError(AdiasearchError, ValueError):
    """An operand is outside the mathematical domain of an operation."""

    exit_code = ExitCode.RANGE


class NumericError(AdiasearchError):
    """A numerical procedure failed to reach its target accuracy."""

    exit_code = ExitCode.NUMERIC


class IntegrationError(NumericError):
    """The step size underflowed before the tolerance could be met."""

    def __init__(self, message: str, last_t: float):
        super().__init__(f"{message} (last good t={last_t:.6g})")
        self.last_t = last_t


class SpectrumError(NumericError):
    """The eigensolver did not converge at a grid point."""

    def __init__(self, message: str, s: float):
        super().__init__(f"{message} (s={s:.6g})")
        self.s = s


class DegeneracyError(NumericError):
    """The ground state is degenerate so no gap can be located."""


class WindowSearchError(NumericError):
    """The success window was never entered within the attempt budget."""

    def __init__(self, message: str, attempts: Optional[List[Tuple[float, float]]] = None):
        super().__init__(message)
        self.attempts = list(attempts or [])


class InsufficientDataError(AdiasearchError):
    """Too few distinct bit widths to fit a scaling exponent."""

    exit_code = ExitCode.INSUFFICIENT_DATA
