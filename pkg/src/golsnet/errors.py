"""Exception types shared across the package."""


class GolsError(Exception):
    """Base class for all package errors."""


class ShapeError(GolsError, ValueError):
    """Operand dimensions do not conform."""


class EvaluationError(GolsError, ArithmeticError):
    """A loss, gradient or activation produced (or was fed) a non-finite value."""

    def __init__(self, message, alpha=None):
        super().__init__(message)
        self.alpha = alpha


class DegenerateBatchError(GolsError, ValueError):
    """Train-mode batch normalization needs at least two rows."""


class ConsistencyError(GolsError, RuntimeError):
    """A forward cache was used with parameters it was not computed from."""


class PreconditionError(GolsError, ValueError):
    pass


class NoSnnGppError(GolsError, ValueError):
    """No negative-to-positive sign change was observed."""


class DataError(GolsError, ValueError):
    """Malformed dataset file or inconsistent schema."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(GolsError, ValueError):
    pass
