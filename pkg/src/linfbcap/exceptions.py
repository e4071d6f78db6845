"""Exception types raised by the library."""


class LinfbError(ValueError):
    """Base class for all validation and numerical-contract errors."""


class DimensionMismatchError(LinfbError):
    """Operands do not conform (block dimensions, matrix shapes, eta)."""


class NotSymmetricError(LinfbError):
    """Matrix fails the symmetry tolerance required for a square root."""


class NotPositiveDefiniteError(LinfbError):
    """Matrix has an eigenvalue at or below the positive-definiteness floor."""


class NonPsdCovarianceError(LinfbError):
    """Input covariance is not positive semidefinite within tolerance."""


class InfeasibleDesignError(LinfbError):
    """Feedback design consumes more than the total block-power budget."""


class NoRootInIntervalError(LinfbError):
    """A root-finding bracket shows no sign change over the search interval."""

    def __init__(self, message, *, variant=None, residual_lo=None, residual_hi=None):
        super().__init__(message)
        self.variant = variant
        self.residual_lo = residual_lo
        self.residual_hi = residual_hi


class ZeroVectorError(LinfbError):
    """A channel vector that must be nonzero is identically zero."""


class IndexRangeError(LinfbError):
    """A per-block index map lands outside the strictly-lower triangular range."""
