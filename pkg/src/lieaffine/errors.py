"""Exception hierarchy shared across the package.

Four classes, matching the four failure modes surfaced at the boundaries:
bad input data, violated mathematical hypotheses, iteration that did not
converge, and floating-point breakdown (overflow, NaN).
"""

from __future__ import annotations


class LieAffineError(Exception):
    """Base class for all errors raised by this package."""


class InputError(LieAffineError, ValueError):
    """Malformed input: wrong shapes, non-finite entries, bad parameters."""


class ValidationError(LieAffineError):
    """A mathematical hypothesis does not hold (commutation, membership, ...)."""


class NumericalError(LieAffineError):
    """Floating-point breakdown: non-finite intermediates, loss of membership."""


class ConvergenceError(NumericalError):
    """An iterative scheme hit its budget before meeting tolerance.

    Carries the last two iterates so callers can inspect how far apart
    the sequence still was.
    """

    def __init__(self, message: str, last_two=None):
        super().__init__(message)
        self.last_two = last_two
