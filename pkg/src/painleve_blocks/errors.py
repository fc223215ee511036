"""Exception and warning types shared across the package."""


class BlocksError(Exception):
    """Base class for numerical failures raised by this package."""


class PoleError(BlocksError, ValueError):
    """A gamma-type function was evaluated at one of its poles."""


class DegenerateParameterError(BlocksError, ValueError):
    """Parameters violate the genericity guard (e.g. 2*sigma too close to an integer)."""


class NonConvergenceError(BlocksError, ArithmeticError):
    """A series did not meet its stopping rule within the allowed number of terms."""


class MissingParameterError(BlocksError, KeyError):
    """A required named parameter was not supplied."""


class IllConditionedWarning(RuntimeWarning):
    pass


class DivergenceWarning(RuntimeWarning):
    pass


class TruncationWarning(RuntimeWarning):
    pass
