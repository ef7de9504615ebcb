class RegularizationError(Exception):
    """Base class for every error raised by the regularization package."""


class ArgumentError(RegularizationError, ValueError):
    """Invalid input: bad dimensions, empty vectors, out-of-range parameters."""


class SingularSystemError(RegularizationError, ArithmeticError):
    """A triangular system has a zero (or sub-tolerance) diagonal entry."""


class NumericalError(RegularizationError, ArithmeticError):
    """An iterative kernel failed to converge."""

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class ExperimentError(RegularizationError):
    """An experiment could not read its inputs or write its artifacts."""
