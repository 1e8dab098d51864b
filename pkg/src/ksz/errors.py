"""Exception hierarchy shared by every module of the package."""


class KSZError(Exception):
    """Base class for all errors raised by :mod:`ksz`."""


class NotHadamardError(KSZError, ValueError):
    """A construction step received a matrix that is not a certified Hadamard matrix."""


class RegistryExhaustedError(KSZError):
    """No registered order is large enough; rebuild the registry with a larger limit."""


class BudgetExceededError(KSZError):
    """Exhaustive enumeration would exceed the evaluation budget."""


class UnsupportedPatternError(KSZError, ValueError):
    """The requested exponent pattern is not covered by any implemented construction."""


class ConvergenceError(KSZError):
    """An iterative method stopped before reaching its tolerance."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class InvariantError(KSZError, AssertionError):
    """An internal consistency check failed (corrupted result)."""
