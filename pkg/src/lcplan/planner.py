"""Labeling-campaign arithmetic and a progressive-sampling stopping rule."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .curve import DEFAULT_CAP, EstimateKind, SampleSizeEstimate, n_at_threshold
from .errors import DomainError, InsufficientDataError
from .experiments import LearningCurveSeries
from .fitting import DEFAULT_CONFIG, FitConfig, fit_with_cutoff

DEFAULT_SIZES = (5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 100, 250, 500, 1000)
DEFAULT_RATIO = 5
DEFAULT_WINDOW = 3
DEFAULT_STABILITY_TOL = 0.15


@dataclass(frozen=True)
class SamplingSchedule:
    sizes: Tuple[int, ...] = DEFAULT_SIZES

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise DomainError("sampling schedule must not be empty")
        if sizes[0] < 1 or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise DomainError(f"schedule must be strictly increasing positive sizes, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    def successor(self, n: int) -> Optional[int]:
        """Smallest scheduled size strictly above ``n``, or None."""
        for s in self.sizes:
            if s > n:
                return s
        return None

    def __iter__(self):
        return iter(self.sizes)

    def __len__(self):
        return len(self.sizes)


DEFAULT_SCHEDULE = SamplingSchedule()


@dataclass(frozen=True)
class CampaignBudget:
    n_positive: int
    negative_ratio: int
    n_negative: int
    total: int
    duplicated_negatives: int

    def as_dict(self) -> dict:
        return {
            "n_positive": self.n_positive,
            "negative_ratio": self.negative_ratio,
            "n_negative": self.n_negative,
            "total": self.total,
            "duplicated_negatives": self.duplicated_negatives,
        }


def budget_for(n_positive: int, negatives_available: int, ratio: int = DEFAULT_RATIO) -> CampaignBudget:
    """Training-set composition for ``n_positive`` cases at 1:``ratio``.

    Negatives missing from the pool are covered by duplication.
    """
    if n_positive < 1:
        raise DomainError(f"n_positive must be >= 1, got {n_positive}")
    if ratio < 1:
        raise DomainError(f"ratio must be >= 1, got {ratio}")
    if negatives_available < 0:
        raise DomainError(f"negatives_available must be >= 0, got {negatives_available}")
    n_negative = n_positive * ratio
    return CampaignBudget(
        n_positive=n_positive,
        negative_ratio=ratio,
        n_negative=n_negative,
        total=n_positive + n_negative,
        duplicated_negatives=max(0, n_negative - negatives_available),
    )


def split_sizes(total: int) -> Tuple[int, int, int]:
    """(train, validation, test) sizes for an 80/10/10 split.

    Each 10% share is rounded to the nearest integer, exact halves down;
    the remainder goes to train.
    """
    if total < 10:
        raise DomainError(f"need at least 10 studies to split 80/10/10, got {total}")
    share = (total + 4) // 10
    return total - 2 * share, share, share


class Action(str, enum.Enum):
    STOP_PREDICTED_REACHED = "stop_predicted_reached"
    STOP_ESTIMATE_STABLE = "stop_estimate_stable"
    CONTINUE = "continue"
    SCHEDULE_EXHAUSTED = "schedule_exhausted"


@dataclass(frozen=True)
class Decision:
    action: Action
    next_n: Optional[int] = None
    # n@threshold refits at the most recent cutoffs, oldest first (None = unfittable)
    estimates: Tuple[Optional[SampleSizeEstimate], ...] = ()
    spread: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "action": self.action.value,
            "next_n": self.next_n,
            "estimates": [e.as_dict() if e is not None else None for e in self.estimates],
            "spread": self.spread,
        }


def _relative_spread(values: Sequence[float]) -> float:
    lo, hi = min(values), max(values)
    return (hi - lo) / lo


def next_action(
    series: LearningCurveSeries,
    threshold: float = 0.9,
    stability_window: int = DEFAULT_WINDOW,
    stability_tol: float = DEFAULT_STABILITY_TOL,
    config: FitConfig = DEFAULT_CONFIG,
    schedule: SamplingSchedule = DEFAULT_SCHEDULE,
    cap: int = DEFAULT_CAP,
) -> Decision:
    """Decide whether to stop labeling or which schedule size to run next.

    Stops when the n@threshold estimates refitted at the last
    ``stability_window`` observed sizes are all finite and agree within
    ``stability_tol`` (relative spread ``(max - min) / min``), or else when
    the newest observed mean already meets ``threshold``.
    """
    if stability_window < 2:
        raise DomainError(f"stability_window must be >= 2, got {stability_window}")
    if stability_tol < 0:
        raise DomainError(f"stability_tol must be >= 0, got {stability_tol}")
    if not 0.0 < threshold < 1.0:
        raise DomainError(f"threshold must lie in (0, 1), got {threshold!r}")
    ns = series.n_values
    if len(ns) < 3:
        raise InsufficientDataError(f"need at least 3 observed sizes to plan, got {len(ns)}")

    points = series.fit_points(raw=config.fit_raw_points)
    estimates = []
    for cutoff in ns[-stability_window:]:
        try:
            result = fit_with_cutoff(points, cutoff, config)
        except InsufficientDataError:
            estimates.append(None)
            continue
        estimates.append(n_at_threshold(result.curve, threshold, cap))
    estimates = tuple(estimates)

    spread = None
    if all(e is not None and e.kind is EstimateKind.FINITE for e in estimates):
        spread = _relative_spread([e.n_required for e in estimates])
        if spread <= stability_tol:
            return Decision(Action.STOP_ESTIMATE_STABLE, estimates=estimates, spread=spread)

    if series.roc_at_nmax >= threshold:
        return Decision(Action.STOP_PREDICTED_REACHED, estimates=estimates, spread=spread)

    nxt = schedule.successor(series.n_max)
    if nxt is None:
        return Decision(Action.SCHEDULE_EXHAUSTED, estimates=estimates, spread=spread)
    return Decision(Action.CONTINUE, nxt, estimates, spread)
