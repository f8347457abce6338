"""Exception types shared across the package."""


class CountThinError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(CountThinError, ValueError):
    """A distribution or plan parameter is outside its domain."""


class DataError(CountThinError, ValueError):
    """An input matrix, vector, or file violates a structural contract."""


class EstimationError(CountThinError, RuntimeError):
    """An estimation problem is degenerate (e.g. all-zero response)."""


class SingularDesignError(CountThinError, ValueError):
    """A regression design matrix is rank deficient."""


class ConvergenceWarning(UserWarning):
    """A fit did not converge; downstream results use conservative fallbacks."""
