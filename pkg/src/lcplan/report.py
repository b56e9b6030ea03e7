"""JSON report documents and TSV plot-data files.

Every float in a report is rounded to 6 significant digits so output is
byte-stable across runs and backends.
"""
from __future__ import annotations

import json
import math
from typing import Iterable, List, Optional, Sequence

from . import __version__
from .analysis import CorrelationStudy, MaeStudy, curve_samples
from .errors import InsufficientDataError
from .experiments import LearningCurveSeries
from .fitting import FitConfig, fit_with_cutoff

SIG_DIGITS = 6


def fmt_float(x: float) -> float:
    if not math.isfinite(x):
        return x
    return float(f"{x:.{SIG_DIGITS}g}")


def _round_floats(obj):
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def document(command: str, config: dict, **sections) -> str:
    """Serialize a report with tool metadata, config echo and result sections."""
    doc = {"tool": "lcplan", "version": __version__, "command": command, "config": config}
    doc.update(sections)
    return json.dumps(_round_floats(doc), indent=2, sort_keys=False, allow_nan=False) + "\n"


def _tsv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


def tsv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = ["\t".join(header)]
    lines.extend("\t".join(_tsv_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def learning_curve_tsv(
    series_set: Sequence[LearningCurveSeries],
    cutoffs: Sequence[Optional[int]],
    config: FitConfig,
    samples: int = 50,
) -> str:
    """Observed means plus fitted-curve samples; cutoff ``None`` fits all points."""
    rows: List[tuple] = []
    for s in sorted(series_set, key=lambda s: (s.pathology, s.model)):
        for p in s.points:
            rows.append((s.pathology, s.model, "observed", "", p.n_cases, p.mean_roc_auc, p.std_roc_auc))
        pts = s.fit_points(raw=config.fit_raw_points)
        for c in cutoffs:
            try:
                result = fit_with_cutoff(pts, c if c is not None else s.n_max, config)
            except InsufficientDataError:
                continue
            label = "all" if c is None else c
            for n, v in curve_samples(result.curve, s.points[0].n_cases, s.n_max, samples):
                rows.append((s.pathology, s.model, "fitted", label, n, v, None))
    return tsv(("pathology", "model", "kind", "cutoff", "n", "roc_auc", "std"), rows)


def slope_tsv(study: CorrelationStudy) -> str:
    return tsv(
        ("slope", "roc_at_nmax", "pathology", "model", "n_total"),
        ((p.slope, p.roc_at_nmax, p.pathology, p.model, p.n_total) for p in study.pairs),
    )


def mae_tsv(study: MaeStudy) -> str:
    return tsv(
        ("cutoff", "mae", "n_eligible", "n_excluded"),
        zip(study.cutoffs, study.mae_per_cutoff, study.n_eligible, study.n_excluded),
    )
