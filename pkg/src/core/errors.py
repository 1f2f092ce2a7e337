"""
Exception hierarchy for the open-system Born-Oppenheimer toolkit.

Numeric failures map to CLI exit code 3, input failures to exit code 2.
"""

from typing import Optional


class BOOpenError(Exception):
    """Base class for every error raised by this package."""


class NumericFailure(BOOpenError):
    """A computation could not produce a trustworthy number."""


class NearDegenerate(NumericFailure):
    def __init__(self, message: str, gap: Optional[float] = None):
        super().__init__(message)
        self.gap = gap


class ConvergenceFailure(NumericFailure):
    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class SingularPairing(NumericFailure):
    pass


class StepOverflow(NumericFailure):
    def __init__(self, message: str, time: Optional[float] = None):
        super().__init__(message)
        self.time = time


class TrackingAmbiguity(NumericFailure):
    def __init__(self, message: str, overlap: Optional[float] = None):
        super().__init__(message)
        self.overlap = overlap


class SmallDenominator(NumericFailure):
    def __init__(self, message: str, denominator: Optional[complex] = None):
        super().__init__(message)
        self.denominator = denominator


class DegenerateEigenvalue(NumericFailure):
    pass


class NoZeroMode(NumericFailure):
    pass


class DimensionMismatch(BOOpenError, ValueError):
    pass


class UnsupportedDissipator(BOOpenError, ValueError):
    pass


class DiagonalRequest(BOOpenError, ValueError):
    pass


class InvalidRates(BOOpenError, ValueError):
    pass


class ConfigError(BOOpenError, ValueError):
    pass
