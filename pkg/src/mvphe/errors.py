"""Exception types shared across the package."""


class MvpheError(Exception):
    """Base class for all package errors."""


class ParameterError(MvpheError, ValueError):
    """A value violates a scheme parameter constraint (bad modulus, mismatched
    dimensions, unsatisfiable parameter combination, ...)."""


class SingularMatrixError(MvpheError, ValueError):
    """Matrix inversion hit a zero pivot.

    ``column`` records the pivot column that could not be eliminated, which
    is useful when key generation needs to decide which points to resample.
    """

    def __init__(self, column: int, message: str | None = None):
        self.column = column
        super().__init__(message or f"matrix is singular (no pivot in column {column})")


class ConstructionError(MvpheError, RuntimeError):
    """A key-construction step failed in a way that signals an invalid input
    object rather than bad luck: inconsistent linear system, a reduction that
    stalls, a failed post-check."""


class GenerationFailure(MvpheError, RuntimeError):
    """Rejection sampling in key generation exceeded its retry cap."""


class DepthError(MvpheError, RuntimeError):
    """A homomorphic operation would exceed the multiplicative depth budget."""


class FormatError(MvpheError, ValueError):
    """Malformed serialized file or circuit text."""
