"""Affine control systems on matrix Lie groups.

Explicit solutions (product-formula limit and closed inner form),
controllability diagnostics, conjugation checks, a plain-text system
format, and an HTTP service with a CLI front end.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    InputError,
    LieAffineError,
    NumericalError,
    ValidationError,
)

__all__ = [
    "__version__",
    "LieAffineError",
    "InputError",
    "ValidationError",
    "NumericalError",
    "ConvergenceError",
]
