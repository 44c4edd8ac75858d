"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class MomentDoesNotExistError(ValueError):
    """The requested moment is infinite for the given parameters."""


class ConvergenceError(ArithmeticError):
    """A series failed to converge within its term budget.

    Attributes
    ----------
    partial_sum : float or ndarray
        Sum accumulated before giving up.
    last_term : float or ndarray
        Magnitude of the last term added.
    """

    def __init__(self, message, partial_sum=None, last_term=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.last_term = last_term


class DatasetError(ValueError):
    """Malformed or empty claim data."""
