"""Evaluation suite over fitted learning curves.

* :func:`build_report` - per (pathology, model) plateau and n@threshold table
* :func:`slope_correlation` - early slope of the fit vs the observed plateau
* :func:`extrapolation_mae` - extrapolation error at ``n_max`` per fit cutoff
* :func:`roc_auc` - Mann-Whitney ROC-AUC with half credit for ties
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from . import _backend
from .curve import DEFAULT_CAP, PowerLawCurve, SampleSizeEstimate, evaluate, n_at_threshold, slope
from .errors import InsufficientDataError, UndefinedMetricError, ValidationError
from .experiments import LearningCurveSeries
from .fitting import DEFAULT_CONFIG, FitConfig, FitResult, fit_with_cutoff

T = TypeVar("T")
R = TypeVar("R")


def _map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> List[R]:
    # results come back in input order either way
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def roc_auc(scores: Iterable[float], labels: Iterable[int]) -> float:
    """Area under the ROC curve by pair counting.

    Equals the fraction of (positive, negative) pairs ranked correctly,
    tied pairs counting one half.
    """
    s = np.asarray(list(scores) if not isinstance(scores, np.ndarray) else scores, dtype=np.float64)
    lab = np.asarray(list(labels) if not isinstance(labels, np.ndarray) else labels)
    if s.ndim != 1 or lab.ndim != 1 or s.shape != lab.shape:
        raise ValidationError(f"scores and labels must be 1-D of equal length, got {s.shape} and {lab.shape}")
    if not np.all(np.isfinite(s)):
        raise ValidationError("scores must be finite")
    if not np.all((lab == 0) | (lab == 1)):
        raise ValidationError("labels must be 0 or 1")
    lab = lab.astype(np.int64)
    order = np.argsort(s, kind="stable")
    twice_u, n_pos, n_neg = _backend.kernels.mann_whitney_twice_u(s[order], lab[order])
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC-AUC needs at least one positive and one negative label")
    return twice_u / (2 * n_pos * n_neg)


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation via centred (two-pass) sums."""
    if len(x) != len(y):
        raise ValidationError("x and y must have equal length")
    if len(x) < 2:
        raise UndefinedMetricError("correlation needs at least 2 pairs")
    mx = math.fsum(x) / len(x)
    my = math.fsum(y) / len(y)
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedMetricError("correlation is undefined when one axis has zero variance")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    return max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))


def _fit_series(series: LearningCurveSeries, cutoff: int, config: FitConfig) -> FitResult:
    return fit_with_cutoff(series.fit_points(raw=config.fit_raw_points), cutoff, config)


@dataclass(frozen=True)
class PathologyReportRow:
    pathology: str
    model: str
    roc_at_nmax: float
    n_max: int
    fit_cutoff: int
    threshold: float
    n_at_threshold: Optional[SampleSizeEstimate]
    fit: Optional[FitResult] = None
    skip_reason: Optional[str] = None

    @property
    def skipped(self) -> bool:
        return self.n_at_threshold is None

    def display(self) -> str:
        return "skip" if self.n_at_threshold is None else self.n_at_threshold.render()

    def as_dict(self) -> dict:
        return {
            "pathology": self.pathology,
            "model": self.model,
            "roc_at_nmax": self.roc_at_nmax,
            "n_max": self.n_max,
            "fit_cutoff": self.fit_cutoff,
            "threshold": self.threshold,
            "n_at_threshold": None if self.n_at_threshold is None else self.n_at_threshold.as_dict(),
            "display": self.display(),
            "fit": None if self.fit is None else self.fit.as_dict(),
            "skip_reason": self.skip_reason,
        }


def build_report(
    series_set: Sequence[LearningCurveSeries],
    fit_cutoff: int = 50,
    threshold: float = 0.9,
    cap: int = DEFAULT_CAP,
    config: FitConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> List[PathologyReportRow]:
    """Observed plateau and predicted n@threshold for every series.

    Series that cannot be fitted at ``fit_cutoff`` come back as skip rows
    carrying the reason instead of raising.
    """

    def row(s: LearningCurveSeries) -> PathologyReportRow:
        base = dict(
            pathology=s.pathology,
            model=s.model,
            roc_at_nmax=s.roc_at_nmax,
            n_max=s.n_max,
            fit_cutoff=fit_cutoff,
            threshold=threshold,
        )
        try:
            result = _fit_series(s, fit_cutoff, config)
        except InsufficientDataError as exc:
            return PathologyReportRow(n_at_threshold=None, skip_reason=str(exc), **base)
        est = n_at_threshold(result.curve, threshold, cap)
        return PathologyReportRow(n_at_threshold=est, fit=result, **base)

    rows = _map(row, list(series_set), workers)
    return sorted(rows, key=lambda r: (r.pathology, r.model))


def render_table(rows: Sequence[PathologyReportRow]) -> str:
    """Plain-text table in the ``roc`` / ``n@90`` layout."""
    lines = ["pathology\tmodel\troc\tn@threshold"]
    for r in rows:
        lines.append(f"{r.pathology}\t{r.model}\t{r.roc_at_nmax:.2f}\t{r.display()}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SlopePair:
    slope: float
    roc_at_nmax: float
    pathology: str
    model: str
    n_total: int


@dataclass(frozen=True)
class CorrelationStudy:
    slope_eval_n: int
    fit_cutoff: int
    pairs: Tuple[SlopePair, ...]
    pearson_r: float
    excluded: Tuple[Tuple[str, str, str], ...] = ()

    def as_dict(self) -> dict:
        return {
            "slope_eval_n": self.slope_eval_n,
            "fit_cutoff": self.fit_cutoff,
            "pearson_r": self.pearson_r,
            "pairs": [
                {
                    "pathology": p.pathology,
                    "model": p.model,
                    "slope": p.slope,
                    "roc_at_nmax": p.roc_at_nmax,
                    "n_total": p.n_total,
                }
                for p in self.pairs
            ],
            "excluded": [{"pathology": a, "model": b, "reason": c} for a, b, c in self.excluded],
        }


def slope_correlation(
    series_set: Sequence[LearningCurveSeries],
    fit_cutoff: int = 50,
    slope_eval_n: int = 5,
    config: FitConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> CorrelationStudy:
    """Correlate the fitted slope at ``slope_eval_n`` with the observed plateau."""

    def one(s: LearningCurveSeries):
        try:
            return s, _fit_series(s, fit_cutoff, config), None
        except InsufficientDataError as exc:
            return s, None, str(exc)

    ordered = sorted(series_set, key=lambda s: (s.pathology, s.model))
    pairs = []
    excluded = []
    for s, result, reason in _map(one, ordered, workers):
        if result is None:
            excluded.append((s.pathology, s.model, reason))
            continue
        pairs.append(SlopePair(slope(result.curve, slope_eval_n), s.roc_at_nmax, s.pathology, s.model, s.n_max))
    if len(pairs) < 2:
        raise UndefinedMetricError(f"correlation needs at least 2 fittable series, got {len(pairs)}")
    r = pearson_r([p.slope for p in pairs], [p.roc_at_nmax for p in pairs])
    return CorrelationStudy(slope_eval_n, fit_cutoff, tuple(pairs), r, tuple(excluded))


@dataclass(frozen=True)
class MaeStudy:
    cutoffs: Tuple[int, ...]
    # None where no series admitted a fit at that cutoff
    mae_per_cutoff: Tuple[Optional[float], ...]
    n_eligible: Tuple[int, ...]
    n_excluded: Tuple[int, ...]

    def mae_at(self, cutoff: int) -> Optional[float]:
        return self.mae_per_cutoff[self.cutoffs.index(cutoff)]

    def as_dict(self) -> dict:
        return {
            "cutoffs": list(self.cutoffs),
            "mae": list(self.mae_per_cutoff),
            "n_eligible": list(self.n_eligible),
            "n_excluded": list(self.n_excluded),
        }


def extrapolation_errors(
    series_set: Sequence[LearningCurveSeries],
    cutoff: int,
    config: FitConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> List[Optional[float]]:
    """``|fit_at_cutoff(n_max) - observed(n_max)|`` per series; None if unfittable."""

    def one(s: LearningCurveSeries) -> Optional[float]:
        try:
            result = _fit_series(s, cutoff, config)
        except InsufficientDataError:
            return None
        return abs(evaluate(result.curve, s.n_max) - s.roc_at_nmax)

    return _map(one, list(series_set), workers)


def extrapolation_mae(
    series_set: Sequence[LearningCurveSeries],
    cutoffs: Sequence[int] = (20, 40),
    config: FitConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> MaeStudy:
    """Mean extrapolation error at ``n_max`` for fits restricted to each cutoff.

    Series too short to fit at a cutoff are left out of that cutoff's mean
    and counted in ``n_excluded``.
    """
    cutoffs = tuple(int(c) for c in cutoffs)
    if list(cutoffs) != sorted(cutoffs):
        raise ValidationError(f"cutoffs must be sorted ascending, got {list(cutoffs)}")
    maes, eligible, excluded = [], [], []
    for c in cutoffs:
        errs = [e for e in extrapolation_errors(series_set, c, config, workers) if e is not None]
        eligible.append(len(errs))
        excluded.append(len(series_set) - len(errs))
        maes.append(math.fsum(errs) / len(errs) if errs else None)
    return MaeStudy(cutoffs, tuple(maes), tuple(eligible), tuple(excluded))


def curve_samples(curve: PowerLawCurve, n_lo: float, n_hi: float, count: int = 50) -> List[Tuple[float, float]]:
    """``(n, roc)`` samples of a fitted curve, log-spaced over ``[n_lo, n_hi]``."""
    ns = np.geomspace(n_lo, n_hi, count)
    return [(float(n), evaluate(curve, float(n))) for n in ns]
