import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SCHEDULE
from lcplan.analysis import (
    build_report,
    extrapolation_errors,
    extrapolation_mae,
    pearson_r,
    render_table,
    roc_auc,
    slope_correlation,
)
from lcplan.curve import EstimateKind, PowerLawCurve, evaluate, n_at_threshold, slope
from lcplan.errors import UndefinedMetricError, ValidationError
from lcplan.experiments import CurvePoint, LearningCurveSeries, aggregate
from lcplan.fitting import fit_with_cutoff
from lcplan.synth import SynthSpec, generate


def brute_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def exact_series(curve, ns=SCHEDULE, pathology="p", model="m"):
    return LearningCurveSeries(pathology, model, tuple(CurvePoint(n, evaluate(curve, n), 0.0, 1) for n in ns))


def noisy_series(curve, seed, sigma=0.02, pathology="p", model="m"):
    return aggregate(generate(SynthSpec(curve, noise_sigma=sigma, rng_seed=seed), pathology, model))[0]


# --- roc_auc -----------------------------------------------------------------

def test_roc_examples(backend):
    assert roc_auc([1, 2, 3, 4], [0, 0, 1, 1]) == 1.0
    assert roc_auc([0.3] * 6, [0, 1, 0, 1, 1, 0]) == 0.5
    assert roc_auc([4, 3, 2, 1], [0, 0, 1, 1]) == 0.0


def test_roc_random_eight(backend):
    rng = np.random.default_rng(8)
    for _ in range(50):
        s = rng.integers(0, 4, 8).astype(float)
        lab = rng.permutation([0, 0, 0, 1, 1, 1, 0, 1])
        assert roc_auc(s, lab) == brute_auc(list(s), list(lab))


def test_roc_single_class():
    with pytest.raises(UndefinedMetricError):
        roc_auc([0.1, 0.2], [1, 1])


@pytest.mark.parametrize("scores,labels", [([0.1, 0.2], [0, 2]), ([0.1], [0, 1]), ([float("nan"), 1], [0, 1])])
def test_roc_validation(scores, labels):
    with pytest.raises(ValidationError):
        roc_auc(scores, labels)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.integers(0, 1)), min_size=2, max_size=40))
def test_roc_properties(data):
    scores = [s for s, _ in data]
    labels = [l for _, l in data]
    if len(set(labels)) < 2:
        return
    auc = roc_auc(scores, labels)
    assert auc == brute_auc(scores, labels)
    # strictly increasing transforms that keep distinct scores distinct
    assert roc_auc([4.0 * s for s in scores], labels) == auc
    ranks = {v: i for i, v in enumerate(sorted(set(scores)))}
    assert roc_auc([math.exp(ranks[s] / 10) for s in scores], labels) == auc
    if len(set(scores)) == len(scores):
        assert auc + roc_auc([-s for s in scores], labels) == pytest.approx(1.0, abs=1e-15)


# --- pearson -----------------------------------------------------------------

def test_pearson_perfect_anticorrelation():
    assert pearson_r([1, 2, 3, 4], [10, 8, 6, 4]) == -1.0


def test_pearson_zero_variance():
    with pytest.raises(UndefinedMetricError):
        pearson_r([1, 2, 3], [0.9, 0.9, 0.9])
    with pytest.raises(UndefinedMetricError):
        pearson_r([1], [2])


@settings(max_examples=200)
@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=3, max_size=30),
       st.floats(0.1, 10), st.floats(-50, 50))
def test_pearson_affine_and_sign(pairs, scale, shift):
    x = [a for a, _ in pairs]
    y = [b for _, b in pairs]
    if np.std(x) < 1e-3 or np.std(y) < 1e-3:
        return
    r = pearson_r(x, y)
    assert pearson_r([scale * v + shift for v in x], y) == pytest.approx(r, abs=1e-9)
    assert pearson_r([-v for v in x], y) == pytest.approx(-r, abs=1e-12)
    assert r == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-9)


# --- build_report --------------------------------------------------------------

def test_report_finite_row():
    (row,) = build_report([exact_series(PowerLawCurve(0.95, 0.5, 1.0))])
    assert row.n_at_threshold.kind is EstimateKind.FINITE
    assert row.n_at_threshold.n_required == pytest.approx(10, rel=1e-6)
    assert row.display() == "10"
    assert row.roc_at_nmax == evaluate(PowerLawCurve(0.95, 0.5, 1.0), 1000)


def test_report_unreachable_renders_inf():
    (row,) = build_report([exact_series(PowerLawCurve(0.86, 0.3, 0.5))])
    assert row.fit.curve.alpha == pytest.approx(0.86, abs=1e-6)
    assert row.n_at_threshold.kind is EstimateKind.UNREACHABLE
    assert row.display() == "inf"


def test_report_grid():
    models = ["resnet50", "raddino", "xrayclip", "xraysiglip"]
    pathologies = ["lobe_mass", "hilar_mass", "pleural_air"]
    truth = {}
    series = []
    for i, (p, m) in enumerate(itertools.product(pathologies, models)):
        c = PowerLawCurve(0.85 + 0.012 * i, 0.3 + 0.05 * i, 0.4 + 0.07 * i)
        truth[(p, m)] = c
        series.append(exact_series(c, pathology=p, model=m))
    rows = build_report(list(reversed(series)))
    assert len(rows) == 12
    assert [(r.pathology, r.model) for r in rows] == sorted(truth)
    for r in rows:
        c = truth[(r.pathology, r.model)]
        expected = n_at_threshold(c, 0.9)
        assert r.n_at_threshold.kind is expected.kind
        if expected.kind is EstimateKind.FINITE:
            assert r.n_at_threshold.n_required == pytest.approx(expected.n_required, rel=1e-4)
        assert r.roc_at_nmax == evaluate(c, 1000)
    assert build_report(series) == rows
    assert rows == build_report(series, workers=4)


def test_report_skip_marker():
    short = exact_series(PowerLawCurve(0.9, 0.3, 0.5), ns=(5, 10, 100))
    ok = exact_series(PowerLawCurve(0.95, 0.5, 1.0), pathology="q")
    rows = build_report([short, ok])
    assert rows[0].skipped and rows[0].display() == "skip" and "distinct" in rows[0].skip_reason
    assert not rows[1].skipped
    assert "skip" in render_table(rows)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.8, 0.95), st.floats(0.8, 0.95))
def test_report_threshold_monotone(seed, t1, t2):
    s = noisy_series(PowerLawCurve(0.91, 0.5, 0.6), seed)
    lo, hi = sorted((t1, t2))
    (a,) = build_report([s], threshold=lo)
    (b,) = build_report([s], threshold=hi)
    assert a.n_at_threshold.sort_key() <= b.n_at_threshold.sort_key()


# --- slope_correlation ---------------------------------------------------------

def test_correlation_matches_two_pass_oracle():
    rng = np.random.default_rng(20)
    series = []
    for i in range(20):
        c = PowerLawCurve(rng.uniform(0.82, 0.99), rng.uniform(0.2, 0.8), rng.uniform(0.3, 1.2))
        series.append(noisy_series(c, 500 + i, pathology=f"p{i:02d}"))
    study = slope_correlation(series, fit_cutoff=50, slope_eval_n=5)
    assert len(study.pairs) == 20
    xs, ys = [], []
    for s in series:
        curve = fit_with_cutoff(s.fit_points(), 50).curve
        xs.append(slope(curve, 5))
        ys.append(s.roc_at_nmax)
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    cov = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    vx = sum((a - mx) ** 2 for a in xs)
    vy = sum((b - my) ** 2 for b in ys)
    assert study.pearson_r == pytest.approx(cov / math.sqrt(vx * vy), abs=0.02)
    assert study.pairs[0].n_total == 1000


def test_correlation_degenerate():
    same = [exact_series(PowerLawCurve(0.9, 0.1 * k, 0.5), pathology=f"p{k}") for k in range(1, 4)]
    # identical plateau is impossible with different beta, so force equal observed plateaus
    flat = [LearningCurveSeries(s.pathology, s.model, s.points[:-1] + (CurvePoint(1000, 0.88, 0, 1),)) for s in same]
    with pytest.raises(UndefinedMetricError):
        slope_correlation(flat)
    with pytest.raises(UndefinedMetricError):
        slope_correlation(same[:1])


# --- extrapolation_mae -----------------------------------------------------------

def test_mae_zero_for_exact_power_laws():
    series = [exact_series(PowerLawCurve(0.85 + 0.01 * k, 0.3 + 0.1 * k, 0.5 + 0.1 * k), pathology=f"p{k}")
              for k in range(5)]
    study = extrapolation_mae(series, [20, 35, 50, 100, 1000])
    assert all(m <= 1e-9 for m in study.mae_per_cutoff)
    assert study.n_eligible == (5,) * 5 and study.n_excluded == (0,) * 5


def test_mae_single_series_at_nmax_is_residual():
    s = noisy_series(PowerLawCurve(0.9, 0.4, 0.7), 3)
    study = extrapolation_mae([s], [1000])
    curve = fit_with_cutoff(s.fit_points(), 1000).curve
    assert study.mae_at(1000) == abs(evaluate(curve, 1000) - s.roc_at_nmax)
    exact = exact_series(PowerLawCurve(0.9, 0.4, 0.7))
    assert extrapolation_mae([exact], [1000]).mae_at(1000) <= 1e-9


def test_mae_at_nmax_is_mean_abs_residual():
    series = [noisy_series(PowerLawCurve(0.9, 0.4, 0.7), k, pathology=f"p{k}") for k in range(6)]
    resid = [abs(evaluate(fit_with_cutoff(s.fit_points(), 1000).curve, 1000) - s.roc_at_nmax) for s in series]
    assert extrapolation_mae(series, [1000]).mae_at(1000) == pytest.approx(sum(resid) / 6, rel=1e-12)


def test_mae_exclusions_and_absent():
    short = exact_series(PowerLawCurve(0.9, 0.3, 0.5), ns=(50, 100, 250, 500))
    full = exact_series(PowerLawCurve(0.9, 0.3, 0.5), pathology="q")
    study = extrapolation_mae([short, full], [10, 20, 250])
    assert study.n_eligible == (0, 1, 2)
    assert study.n_excluded == (2, 1, 0)
    assert study.mae_per_cutoff[0] is None
    assert extrapolation_errors([short, full], 20)[0] is None


def test_mae_cutoffs_sorted():
    with pytest.raises(ValidationError):
        extrapolation_mae([exact_series(PowerLawCurve(0.9, 0.3, 0.5))], [50, 20])


def test_mae_decays_on_noisy_ensemble():
    rng = np.random.default_rng(50)
    meds20, meds50 = [], []
    for trial in range(5):
        series = []
        for i in range(50):
            c = PowerLawCurve(rng.uniform(0.82, 0.99), rng.uniform(0.2, 0.8), rng.uniform(0.3, 1.2))
            series.append(noisy_series(c, 10_000 * trial + i, pathology=f"p{i:02d}"))
        study = extrapolation_mae(series, [20, 35, 50, 100])
        meds20.append(study.mae_at(20))
        meds50.append(study.mae_at(50))
    assert np.median(meds50) <= np.median(meds20)
