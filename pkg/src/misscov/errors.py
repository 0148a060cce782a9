"""Exception types shared across the package."""

from __future__ import annotations


class MissCovError(Exception):
    """Base class for all package errors."""


class DataError(MissCovError, ValueError):
    """Input data violates a precondition (shape, mask, unobserved variable)."""


class UndefinedMeanError(DataError):
    """One or more variables were never observed, so their mean is undefined."""

    def __init__(self, coordinates: list[int] | tuple[int, ...], names: list[str] | None = None):
        self.coordinates = tuple(int(c) for c in coordinates)
        if names is not None:
            labels = [names[c] for c in self.coordinates]
        else:
            labels = [str(c) for c in self.coordinates]
        super().__init__(
            f"variable(s) never observed, mean undefined: {', '.join(labels)}"
        )


class NumericError(MissCovError, ArithmeticError):
    """A numerical routine failed (non-finite input, no convergence)."""


class ConvergenceError(NumericError):
    """An iterative routine hit its iteration cap before reaching tolerance."""
