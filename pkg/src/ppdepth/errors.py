"""Exception types shared across the package."""


class DataValidationError(ValueError):
    """Invalid input data or configuration (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """Numerical failure, e.g. a diverged center search (CLI exit code 3)."""
