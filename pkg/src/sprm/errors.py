"""Exception types shared across the solver stack."""


class SprmError(Exception):
    """Base class for all package errors."""


class CapacityError(SprmError):
    pass


class DimensionError(SprmError, ValueError):
    pass


class NumericalBreakdown(SprmError):
    """Simplex pivots became too small to trust."""


class InfeasibleError(SprmError):
    pass


class BudgetExceeded(SprmError):
    """Raised when an exact search runs out of nodes.

    The best solution found so far is kept on ``incumbent`` (may be None).
    """

    def __init__(self, message, incumbent=None):
        super().__init__(message)
        self.incumbent = incumbent


class CutLimitExceeded(SprmError):
    pass


class DataError(SprmError):
    pass


class DivisionHazard(SprmError, ValueError):
    """The homogenizing coordinate is too close to zero to invert."""


class PreconditionError(SprmError, ValueError):
    pass
