"""Exception types shared across the package.

Every numerical routine either returns a value meeting its stated
tolerance or raises one of these; no silent degradation.
"""


class PolyheatError(Exception):
    """Base class for all package errors."""


class DomainViolation(PolyheatError, ValueError):
    """An argument is outside the domain a routine is defined on."""


class EvaluationFailure(PolyheatError):
    """An iteration did not converge within its budget."""

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class AccuracyFailure(PolyheatError):
    """A result could not be certified to the requested tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class TruncationViolation(PolyheatError):
    """Data reaches the edge of a truncated computational domain."""


class DegenerateInput(PolyheatError):
    """An input is numerically degenerate (e.g. a vanishing norm)."""


class InsufficientData(PolyheatError):
    """Not enough samples/features to carry out the requested fit."""


class InputIncomplete(PolyheatError):
    """A computation needs more inputs than were supplied."""
