"""Bounded nonlinear least squares for the power-law learning curve.

The solver is a damped Gauss-Newton (Levenberg-Marquardt) iteration with an
active-set projection onto the parameter box; the inner loop lives in
:mod:`lcplan._ckernels` when compiled, else in :mod:`lcplan._pykernels`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from . import _backend
from .curve import PowerLawCurve
from .errors import DomainError, InsufficientDataError, ValidationError

# stands in for +inf on beta/gamma so clipping stays finite
UNBOUNDED = 1e12
# below this beta the curve is flat and gamma carries no information
BETA_COLLAPSE = 1e-9
MIN_DISTINCT_N = 3


class Termination(str, enum.Enum):
    GRADIENT_SMALL = "gradient_small"
    STEP_SMALL = "step_small"
    MAX_ITERATIONS = "max_iterations"


_CODES = {
    _backend.GRADIENT_SMALL: Termination.GRADIENT_SMALL,
    _backend.STEP_SMALL: Termination.STEP_SMALL,
    _backend.MAX_ITERATIONS: Termination.MAX_ITERATIONS,
}


@dataclass(frozen=True)
class FitConfig:
    """Solver settings. Defaults are the standard start point and bounds.

    ``fit_raw_points`` makes series-level fits use every replicate instead
    of the per-size seed means.
    """

    initial_guess: Tuple[float, float, float] = (0.95, 0.5, 1.0)
    lower: Tuple[float, float, float] = (0.8, 0.0, 0.0)
    upper: Tuple[float, float, float] = (1.0, UNBOUNDED, UNBOUNDED)
    max_iterations: int = 200
    # bound on max_j |J_j . r| / (|J_j| |r|) over free parameters
    gradient_tolerance: float = 1e-8
    step_tolerance: float = 1e-10
    fit_raw_points: bool = False

    def __post_init__(self):
        if len(self.initial_guess) != 3 or len(self.lower) != 3 or len(self.upper) != 3:
            raise DomainError("initial_guess and bounds need exactly three entries")
        upper = tuple(min(float(u), UNBOUNDED) for u in self.upper)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "initial_guess", tuple(float(v) for v in self.initial_guess))
        for lo, x0, hi in zip(self.lower, self.initial_guess, upper):
            if not lo <= x0 <= hi:
                raise DomainError(f"initial guess {self.initial_guess} lies outside the bounds")
        if self.lower[0] < 0.8 or upper[0] > 1.0 or self.lower[1] < 0 or self.lower[2] < 0:
            raise DomainError("bounds must stay within alpha in [0.8, 1], beta >= 0, gamma >= 0")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be positive")
        if not (self.gradient_tolerance > 0 and self.step_tolerance > 0):
            raise DomainError("tolerances must be strictly positive")

    def as_dict(self) -> dict:
        return {
            "initial_guess": list(self.initial_guess),
            "lower": list(self.lower),
            "upper": list(self.upper),
            "max_iterations": self.max_iterations,
            "gradient_tolerance": self.gradient_tolerance,
            "step_tolerance": self.step_tolerance,
            "fit_raw_points": self.fit_raw_points,
        }


DEFAULT_CONFIG = FitConfig()


@dataclass(frozen=True)
class FitResult:
    curve: PowerLawCurve
    cutoff: Optional[int]
    sse: float
    rmse: float
    n_points: int
    n_observations: int
    converged: bool
    iterations: int
    termination: Termination
    gamma_unidentifiable: bool = False
    backend: str = field(default=_backend.NAME, compare=False)

    def as_dict(self) -> dict:
        return {
            "alpha": self.curve.alpha,
            "beta": self.curve.beta,
            "gamma": self.curve.gamma,
            "cutoff": self.cutoff,
            "sse": self.sse,
            "rmse": self.rmse,
            "n_points": self.n_points,
            "n_observations": self.n_observations,
            "converged": self.converged,
            "iterations": self.iterations,
            "termination": self.termination.value,
            "gamma_unidentifiable": self.gamma_unidentifiable,
        }


def _validate(points: Iterable[Sequence[float]]) -> Tuple[np.ndarray, np.ndarray]:
    rows = []
    for i, pt in enumerate(points):
        try:
            n, y = pt
            n, y = float(n), float(y)
        except (TypeError, ValueError):
            raise ValidationError(f"point {i}: expected a (n, roc_auc) pair, got {pt!r}") from None
        if not n >= 1.0 or not math.isfinite(n):
            raise ValidationError(f"point {i}: training size must be >= 1, got {n!r}")
        if not 0.0 <= y <= 1.0:
            raise ValidationError(f"point {i}: roc_auc must lie in [0, 1], got {y!r}")
        rows.append((n, y))
    # canonical order makes the result independent of input ordering
    rows.sort()
    arr = np.array(rows, dtype=np.float64).reshape(-1, 2)
    return arr[:, 0].copy(), arr[:, 1].copy()


def _check_distinct(ns: np.ndarray, context: str = "") -> int:
    k = len(np.unique(ns))
    if k < MIN_DISTINCT_N:
        raise InsufficientDataError(
            f"power-law fit needs at least {MIN_DISTINCT_N} distinct training sizes, "
            f"got {k}{context}"
        )
    return k


def sse_of(curve: PowerLawCurve, points: Iterable[Sequence[float]]) -> float:
    """Sum of squared residuals of ``curve`` on ``points``."""
    ns, ys = _validate(points)
    r = ys - (curve.alpha - curve.beta * ns ** (-curve.gamma))
    return float(r @ r)


def jacobian(curve: PowerLawCurve, n_values: Iterable[float]) -> np.ndarray:
    """Model derivatives with respect to (alpha, beta, gamma), one row per ``n``.

    The residual ``y - m(n)`` has the negated Jacobian.
    """
    ns = np.asarray(list(n_values), dtype=np.float64)
    if ns.size and not np.all(ns >= 1.0):
        raise DomainError("training sizes must be >= 1")
    t = ns ** (-curve.gamma)
    return np.column_stack([np.ones_like(ns), -t, curve.beta * t * np.log(ns)])


def projected_gradient(
    curve: PowerLawCurve, points: Iterable[Sequence[float]], config: FitConfig = DEFAULT_CONFIG
) -> np.ndarray:
    """Gradient of half the SSE with components blocked by active bounds zeroed."""
    ns, ys = _validate(points)
    p = (curve.alpha, curve.beta, curve.gamma)
    r = ys - (curve.alpha - curve.beta * ns ** (-curve.gamma))
    grad = -(jacobian(curve, ns).T @ r)
    for i in range(3):
        if (p[i] <= config.lower[i] and grad[i] > 0) or (p[i] >= config.upper[i] and grad[i] < 0):
            grad[i] = 0.0
    return grad


def stationarity(
    curve: PowerLawCurve, points: Iterable[Sequence[float]], config: FitConfig = DEFAULT_CONFIG
) -> float:
    """Largest |cosine| between the residual and a free Jacobian column.

    This scale-free measure is what ``gradient_tolerance`` bounds; 0 means
    the residual is orthogonal to every feasible descent direction.
    """
    ns, ys = _validate(points)
    r = ys - (curve.alpha - curve.beta * ns ** (-curve.gamma))
    rnorm = float(np.sqrt(r @ r))
    if rnorm == 0.0:
        return 0.0
    grad = projected_gradient(curve, list(zip(ns, ys)), config)
    cols = np.sqrt((jacobian(curve, ns) ** 2).sum(axis=0))
    safe = np.where(cols > 0, cols, 1.0)
    return float(np.max(np.where(cols > 0, np.abs(grad) / safe, 0.0)) / rnorm)


def fit(
    points: Iterable[Sequence[float]],
    config: FitConfig = DEFAULT_CONFIG,
    cutoff: Optional[int] = None,
) -> FitResult:
    """Fit ``alpha - beta * n**-gamma`` to ``(n, roc_auc)`` pairs.

    Parameters
    ----------
    points : iterable of (n, roc_auc)
        Training sizes (>= 1) and observed ROC-AUC values. Repeated ``n``
        values are allowed and each contributes its own residual.
    config : FitConfig
        Start point, bounds and stopping rules.
    cutoff : int, optional
        Recorded on the result only; use :func:`fit_with_cutoff` to filter.

    Returns
    -------
    FitResult
        A local minimizer of the squared error within the bounds.
    """
    ns, ys = _validate(points)
    k = _check_distinct(ns)
    a, b, g, iterations, code = _backend.kernels.fit_power_law(
        ns,
        ys,
        config.initial_guess,
        config.lower,
        config.upper,
        config.max_iterations,
        config.gradient_tolerance,
        config.step_tolerance,
    )
    flat = b < BETA_COLLAPSE
    if flat:
        b, g = 0.0, config.initial_guess[2]
    curve = PowerLawCurve(a, b, g)
    r = ys - (a - b * ns ** (-g))
    sse = float(r @ r)
    termination = _CODES[code]
    return FitResult(
        curve=curve,
        cutoff=cutoff,
        sse=sse,
        rmse=math.sqrt(sse / len(ns)),
        n_points=k,
        n_observations=len(ns),
        converged=termination is not Termination.MAX_ITERATIONS,
        iterations=iterations,
        termination=termination,
        gamma_unidentifiable=flat,
    )


def fit_with_cutoff(
    points: Iterable[Sequence[float]], cutoff: int, config: FitConfig = DEFAULT_CONFIG
) -> FitResult:
    """Fit using only the points with ``n <= cutoff``."""
    if cutoff < 1:
        raise DomainError(f"cutoff must be a positive integer, got {cutoff!r}")
    points = list(points)
    kept = [pt for pt in points if float(pt[0]) <= cutoff]
    ns = np.array([float(pt[0]) for pt in kept])
    _check_distinct(ns, context=f" with n <= {cutoff}")
    return fit(kept, config, cutoff=cutoff)
