"""Exception hierarchy for lsspa."""


class LSSPAError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(LSSPAError, ValueError):
    """Malformed data, mismatched shapes, or out-of-range parameters."""


class NumericalError(LSSPAError, ArithmeticError):
    """A factorization or solve could not be carried out reliably."""


class RankDeficientError(NumericalError):
    """The training feature matrix does not have full column rank."""

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(
            message
            or f"feature matrix is numerically rank deficient at column {column}"
        )


class ConditioningError(NumericalError):
    """Cholesky of the Gram matrix failed; the QR reduction is more stable."""


class UndefinedMetricError(LSSPAError, ValueError):
    """R^2 is undefined because the test labels are identically zero."""


class InsufficientSamplesError(LSSPAError, ValueError):
    """Not enough lift vectors to form an unbiased covariance."""


class UnsupportedDimensionError(LSSPAError, ValueError):
    """Requested Sobol' dimension exceeds the available direction numbers."""
