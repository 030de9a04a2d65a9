"""Exceptions raised by the ``geocorr`` package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateMarginal(DomainError):
    """A correlation was requested for a marginal with zero variance (p = 1).
    """


class BudgetExceeded(RuntimeError):
    """Exact rational evaluation would exceed the denominator bit budget."""
