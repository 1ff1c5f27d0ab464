"""Exception types shared across the package."""


class OpsysError(Exception):
    """Base class for all package-specific errors."""


class InvalidDimensionError(OpsysError):
    """Dimension parameter out of the supported range."""


class UnsupportedDimensionError(OpsysError):
    """Construction is not available in this dimension (e.g. composite d for MUBs)."""


class InvalidGeneratorError(OpsysError):
    """Generator specification violates an index constraint (e.g. i == j)."""


class InvalidParameterError(OpsysError):
    """Numeric parameter out of range (e.g. eps <= 0, non-increasing t-sequence)."""


class DimensionMismatchError(OpsysError):
    """Operands built over different spaces or incompatible levels/shapes."""


class NumericInputError(OpsysError):
    """Input array is non-finite, non-square or not Hermitian where required."""


class PreconditionError(OpsysError):
    """A checked oracle precondition (e.g. 0 <= p <= e) does not hold."""


class SearchFailed(OpsysError):
    """Raised when an instance search ends above its acceptance threshold.

    Carries the best instance found and its error so the caller can decide
    whether to keep it anyway.
    """

    def __init__(self, message, instance=None, error=None):
        super().__init__(message)
        self.instance = instance
        self.error = error
