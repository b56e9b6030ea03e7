"""Exception hierarchy shared by every lcplan module."""


class LcplanError(ValueError):
    """Base class for all recoverable lcplan errors."""


class DomainError(LcplanError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(LcplanError):
    """Input data violates the experiment schema."""


class InsufficientDataError(LcplanError):
    """Too few distinct training sizes to support a fit."""


class UndefinedMetricError(LcplanError):
    """A statistic is undefined for the given input (single class, zero variance)."""
