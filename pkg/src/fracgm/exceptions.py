"""Exception types shared across the package."""


class FracgmError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(FracgmError, ValueError):
    """An input array has the wrong shape for the problem at hand."""


class DegenerateProblemError(FracgmError):
    """The weighted normal matrix is singular (too few or collinear data)."""


class DegenerateGeometryError(FracgmError):
    """Point configuration does not determine an alignment (rank-deficient)."""


class InsufficientDataError(FracgmError, ValueError):
    """Fewer correspondences than the minimum the solver needs."""


class InvariantViolationError(FracgmError):
    """An internal solver invariant was broken; indicates bad inputs or a bug."""
