"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class UnsupportedDimensionError(ValueError):
    """The dimension parameter d is outside the supported range d > 1."""


class ExponentRangeError(ValueError):
    """An exponent pair violates the admissible range for the requested check."""


class ResolutionError(RuntimeError):
    """A grid is too coarse to resolve the requested oscillation.

    Carries the largest frequency the grid can resolve.
    """

    def __init__(self, message, max_admissible):
        super().__init__(message)
        self.max_admissible = float(max_admissible)


class InsufficientDataError(RuntimeError):
    """Not enough envelope points (or samples) to perform a fit."""
