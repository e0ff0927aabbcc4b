"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed or unusable relational input."""


class NumericalError(ArithmeticError):
    """A sampler or likelihood hit an impossible numerical state."""
