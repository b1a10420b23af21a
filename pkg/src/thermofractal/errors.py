"""Exception types shared across the package."""


class ThermofractalError(Exception):
    """Base class for all package errors."""


class DomainError(ThermofractalError, ValueError):
    """A parameter or query is outside its admissible domain."""


class NumericalError(ThermofractalError, RuntimeError):
    """An iterative numerical procedure failed to converge."""


class BudgetError(ThermofractalError, RuntimeError):
    """A computation would exceed its declared enumeration/size budget."""


class DataError(ThermofractalError, ValueError):
    """Input data violates a structural requirement (e.g. convexity)."""
