"""Exception types raised by the package."""

from .scalars import ArithmeticOverflowError


class LSNessError(Exception):
    """Base class for library errors."""


class UnsupportedCombinationError(LSNessError, ValueError):
    """Requested mode/basis combination cannot be represented (e.g. exact + orthonormal)."""


class CutoffError(LSNessError, ValueError):
    """Auxiliary cutoff too small for the requested chain length."""


class ConsistencyError(LSNessError, RuntimeError):
    """Two independent evaluation routes disagree."""


class DegeneracyError(LSNessError, RuntimeError):
    """A Liouvillian sector does not have a one-dimensional kernel."""


class SizeLimitError(LSNessError, ValueError):
    """Problem size exceeds a configured resource limit."""


class SymmetryError(LSNessError, ValueError):
    """Operator is not block diagonal with respect to the hole number."""


__all__ = [
    "ArithmeticOverflowError",
    "LSNessError",
    "UnsupportedCombinationError",
    "CutoffError",
    "ConsistencyError",
    "DegeneracyError",
    "SizeLimitError",
    "SymmetryError",
]
