"""Power-law learning curve ``roc(n) = alpha - beta * n**(-gamma)``.

Evaluation, derivative and threshold inversion for a fitted curve. All
objects here are immutable and the functions are pure.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError

ALPHA_BOUNDS = (0.8, 1.0)
DEFAULT_CAP = 1_000_000
# below this, gamma or the plateau margin make the closed-form inversion blow up
DEGENERACY_TOL = 1e-9
_SNAP_RTOL = 1e-12


@dataclass(frozen=True)
class PowerLawCurve:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        lo, hi = ALPHA_BOUNDS
        if not lo <= self.alpha <= hi:
            raise DomainError(f"alpha must lie in [{lo}, {hi}], got {self.alpha!r}")
        if self.beta < 0:
            raise DomainError(f"beta must be >= 0, got {self.beta!r}")
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma!r}")

    def __call__(self, n: float) -> float:
        return evaluate(self, n)

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}


class EstimateKind(str, enum.Enum):
    FINITE = "finite"
    ABOVE_CAP = "above_cap"
    UNREACHABLE = "unreachable"


_KIND_RANK = {EstimateKind.FINITE: 0, EstimateKind.ABOVE_CAP: 1, EstimateKind.UNREACHABLE: 2}


@dataclass(frozen=True)
class SampleSizeEstimate:
    """Outcome of inverting a curve at a target ROC-AUC.

    ``n_required`` is only set for :attr:`EstimateKind.FINITE` results.
    """

    kind: EstimateKind
    n_required: Optional[float] = None
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.cap < 1:
            raise DomainError(f"cap must be >= 1, got {self.cap!r}")
        if self.kind is EstimateKind.FINITE:
            if self.n_required is None or not 1 <= self.n_required <= self.cap:
                raise DomainError(
                    f"finite estimate needs 1 <= n_required <= {self.cap}, got {self.n_required!r}"
                )
        elif self.n_required is not None:
            raise DomainError(f"{self.kind.value} estimate carries no n_required")

    @property
    def n_ceil(self) -> Optional[int]:
        if self.n_required is None:
            return None
        return math.ceil(self.n_required)

    def sort_key(self) -> tuple:
        """Total order: finite (by n) < above cap < unreachable."""
        return (_KIND_RANK[self.kind], self.n_required if self.n_required is not None else 0.0)

    def render(self) -> str:
        """Table cell text: integer count, ``>1M`` or ``inf``."""
        if self.kind is EstimateKind.FINITE:
            return str(self.n_ceil)
        if self.kind is EstimateKind.ABOVE_CAP:
            return _cap_label(self.cap)
        return "inf"

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n_required": self.n_required,
            "n_ceil": self.n_ceil,
            "cap": self.cap,
            "display": self.render(),
        }


def _cap_label(cap: int) -> str:
    if cap % 1_000_000 == 0:
        return f">{cap // 1_000_000}M"
    if cap % 1000 == 0:
        return f">{cap // 1000}K"
    return f">{cap}"


def _check_n(n: float) -> float:
    n = float(n)
    if not n >= 1.0:  # also rejects NaN
        raise DomainError(f"training size must be >= 1, got {n!r}")
    return n


def evaluate(curve: PowerLawCurve, n: float) -> float:
    """Predicted ROC-AUC at training size ``n``."""
    n = _check_n(n)
    return curve.alpha - curve.beta * n ** (-curve.gamma)


def slope(curve: PowerLawCurve, n: float) -> float:
    """Derivative d roc / dn = beta * gamma / n**(gamma + 1)."""
    n = _check_n(n)
    return curve.beta * curve.gamma / n ** (curve.gamma + 1.0)


def n_at_threshold(
    curve: PowerLawCurve, threshold: float = 0.9, cap: int = DEFAULT_CAP
) -> SampleSizeEstimate:
    """Smallest training size at which ``curve`` reaches ``threshold``.

    Returns an :class:`EstimateKind.UNREACHABLE` estimate when the plateau
    does not exceed the threshold (or the curve is numerically flat), and
    :class:`EstimateKind.ABOVE_CAP` when the crossing lies beyond ``cap``.
    """
    threshold = float(threshold)
    if not 0.0 < threshold < 1.0:
        raise DomainError(f"threshold must lie in (0, 1), got {threshold!r}")
    if cap < 1:
        raise DomainError(f"cap must be >= 1, got {cap!r}")

    margin = curve.alpha - threshold
    if margin < DEGENERACY_TOL:
        return SampleSizeEstimate(EstimateKind.UNREACHABLE, cap=cap)
    if curve.beta <= margin:
        # already above threshold at n = 1 (covers beta == 0)
        return SampleSizeEstimate(EstimateKind.FINITE, 1.0, cap=cap)
    if curve.gamma < DEGENERACY_TOL:
        return SampleSizeEstimate(EstimateKind.UNREACHABLE, cap=cap)

    log_n = (math.log(curve.beta) - math.log(margin)) / curve.gamma
    if log_n > math.log(cap) + 1.0:
        # far beyond the cap; skip the pow, which could overflow
        return SampleSizeEstimate(EstimateKind.ABOVE_CAP, cap=cap)
    n = (curve.beta / margin) ** (1.0 / curve.gamma)
    nearest = round(n)
    if abs(n - nearest) <= _SNAP_RTOL * n:
        # 0.95 - 0.9 is not exact in binary; keep integral crossings integral
        n = float(nearest)
    if n <= 1.0:
        return SampleSizeEstimate(EstimateKind.FINITE, 1.0, cap=cap)
    if n > cap:
        return SampleSizeEstimate(EstimateKind.ABOVE_CAP, cap=cap)
    return SampleSizeEstimate(EstimateKind.FINITE, n, cap=cap)
