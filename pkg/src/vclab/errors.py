"""Exception types shared across the toolkit."""


class VclabError(Exception):
    """Base class for all toolkit errors."""


class InvalidGroupError(VclabError, ValueError):
    """A Cayley table violates a group axiom."""


class BudgetExceeded(VclabError):
    """A search or enumeration ran past its configured budget.

    ``needed`` carries the budget that would have been required, when known.
    """

    def __init__(self, message, needed=None):
        super().__init__(message)
        self.needed = needed


class ConsistencyError(VclabError, AssertionError):
    """An internal check failed that a cited theorem guarantees cannot fail."""


class ConstructionError(VclabError, ValueError):
    """The counterexample construction is not applicable to the given input."""
