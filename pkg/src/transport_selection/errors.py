"""
Exception types raised by the construction.

Invalid inputs derive from ``ValueError`` so callers that already guard with
``except ValueError`` keep working.
"""
from typing import Any, Optional


class ConstructionError(ValueError):
    """Invalid input to one of the construction's operations."""


class AlignmentError(ConstructionError):
    """Square, window or time is not aligned with the dyadic structure it is used on."""


class TimeDomainError(ConstructionError):
    """Time outside [0, 2]."""


class SingularTimeError(ConstructionError):
    """Flow query on the untruncated field touching the accumulation time t = 1."""


class StepSizeError(RuntimeError):
    """Integrator or finite-volume step rejected (halving disagreement, non-finite samples)."""


class ConfigError(ValueError):
    """Unknown key, unparsable value or out-of-range setting in a scenario config."""


class SelectionError(RuntimeError):
    """The k ladder was exhausted without meeting the selection bound."""

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report
