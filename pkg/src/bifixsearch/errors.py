"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class BifixSearchError(Exception):
    """Base class for all errors raised by bifixsearch."""


class ValidationError(BifixSearchError, ValueError):
    """Raised when a problem definition or a flag is malformed.

    ``field`` names the offending input so front ends can report it.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class UnequalLengths(ValidationError):
    pass


class DuplicateSequence(ValidationError):
    pass


class BadDistribution(ValidationError):
    pass


class UnreachableSet(ValidationError):
    pass


class UnknownSymbol(ValidationError):
    pass


class ComputationError(BifixSearchError):
    """Raised when a well-formed input cannot be evaluated."""


class SingularSystem(ComputationError):
    pass


class TooLarge(ComputationError):
    pass


class InsufficientTruncation(ComputationError):
    pass


class NegativeVariance(ComputationError):
    pass


class NoFeasibleSet(ComputationError):
    pass


class TruncationWarning(UserWarning):
    """The distribution was cut off before its cumulative mass reached 1 - tail_tol."""
