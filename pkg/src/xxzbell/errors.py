"""Exception types shared across the package."""


class XXZError(Exception):
    """Base class for library errors."""


class AccuracyError(XXZError):
    """A numerical routine could not reach its requested accuracy.

    ``estimate`` carries the best error estimate that was achieved.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DomainError(XXZError, ValueError):
    """Input outside the physical or mathematical domain of an operation."""


class MemoryBudgetError(XXZError):
    """A requested diagonalization exceeds the configured memory budget."""
