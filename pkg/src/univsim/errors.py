"""Exception types shared across the engine."""


class UnivsimError(Exception):
    """Base class for everything raised deliberately by this package."""


class ValidationError(UnivsimError):
    """An object failed its construction-time invariants."""


class TypeMismatchError(UnivsimError):
    """Domains/codomains do not line up for the requested operation."""


class UnknownElementError(UnivsimError):
    """A label does not belong to the set it was looked up in."""


class BudgetExceededError(UnivsimError):
    """A search space is larger than the configured candidate budget.

    Distinct from a negative verdict: the caller learns the answer is
    unknown, not false.
    """

    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget
