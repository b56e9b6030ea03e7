"""Power-law learning-curve fitting and labeling-budget planning."""
from .curve import (
    EstimateKind,
    PowerLawCurve,
    SampleSizeEstimate,
    evaluate,
    n_at_threshold,
    slope,
)
from .errors import (
    DomainError,
    InsufficientDataError,
    LcplanError,
    UndefinedMetricError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "EstimateKind",
    "InsufficientDataError",
    "LcplanError",
    "PowerLawCurve",
    "SampleSizeEstimate",
    "UndefinedMetricError",
    "ValidationError",
    "evaluate",
    "n_at_threshold",
    "slope",
]
