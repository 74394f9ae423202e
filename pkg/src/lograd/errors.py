"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Shapes or sizes of inputs are incompatible with the requested operation."""


class NumericalError(ArithmeticError):
    """A numerical routine failed (non-finite data, non-convergence, ...)."""
