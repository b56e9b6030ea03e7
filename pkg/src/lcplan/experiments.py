"""Experiment records: ingestion, validation and seed aggregation.

CSV layout (UTF-8, header required)::

    pathology,model,n_cases,seed,roc_auc
    pulmonary_fibrosis,xraysiglip,5,0,0.91

JSON layout is an array of objects with the same five keys. Identifiers
are lower-cased on ingest. The per-size dispersion is the population
standard deviation: the seeds at one size are the whole replicate set.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import IO, Dict, Iterable, List, Sequence, Tuple, Union

from .errors import InsufficientDataError, ValidationError

FIELDS = ("pathology", "model", "n_cases", "seed", "roc_auc")

Source = Union[bytes, str, IO[bytes], IO[str]]


@dataclass(frozen=True)
class ExperimentPoint:
    pathology: str
    model: str
    n_cases: int
    seed: int
    roc_auc: float

    @property
    def key(self) -> Tuple[str, str, int, int]:
        return (self.pathology, self.model, self.n_cases, self.seed)

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in FIELDS}


@dataclass(frozen=True)
class CurvePoint:
    n_cases: int
    mean_roc_auc: float
    std_roc_auc: float
    n_seeds: int


@dataclass(frozen=True)
class LearningCurveSeries:
    pathology: str
    model: str
    points: Tuple[CurvePoint, ...]
    # every (n_cases, roc_auc) replicate behind ``points``, sorted
    raw: Tuple[Tuple[int, float], ...] = ()

    def __post_init__(self):
        if not self.points:
            raise InsufficientDataError(f"series {self.pathology}/{self.model} has no points")
        ns = [p.n_cases for p in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValidationError("series points must be strictly increasing in n_cases")

    @property
    def n_max(self) -> int:
        return self.points[-1].n_cases

    @property
    def roc_at_nmax(self) -> float:
        """Observed mean ROC-AUC at the largest training size."""
        return self.points[-1].mean_roc_auc

    @property
    def n_values(self) -> List[int]:
        return [p.n_cases for p in self.points]

    def fit_points(self, raw: bool = False) -> List[Tuple[int, float]]:
        """Points to hand to the fitter: seed means, or every replicate."""
        if raw and self.raw:
            return list(self.raw)
        return [(p.n_cases, p.mean_roc_auc) for p in self.points]


def _parse_identifier(value, field: str, where: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise ValidationError(f"{where}: field '{field}' must be a non-empty identifier, got {value!r}")
    return value.strip().lower()


def _parse_int(value, field: str, where: str, minimum: int) -> int:
    if isinstance(value, bool):
        raise ValidationError(f"{where}: field '{field}' must be an integer, got {value!r}")
    if isinstance(value, int):
        out = value
    elif isinstance(value, str):
        text = value.strip()
        if not text or not text.lstrip("+-").isdigit():
            raise ValidationError(f"{where}: field '{field}' must be a base-10 integer, got {value!r}")
        out = int(text)
    else:
        raise ValidationError(f"{where}: field '{field}' must be an integer, got {value!r}")
    if out < minimum:
        raise ValidationError(f"{where}: field '{field}' must be >= {minimum}, got {out}")
    return out


def _parse_roc(value, where: str) -> float:
    if isinstance(value, bool):
        raise ValidationError(f"{where}: field 'roc_auc' must be a number, got {value!r}")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: field 'roc_auc' must be a number, got {value!r}") from None
    if not 0.0 <= out <= 1.0:
        raise ValidationError(f"{where}: field 'roc_auc' must lie in [0, 1], got {value!r}")
    return out


def _make_point(record: dict, where: str) -> ExperimentPoint:
    return ExperimentPoint(
        pathology=_parse_identifier(record["pathology"], "pathology", where),
        model=_parse_identifier(record["model"], "model", where),
        n_cases=_parse_int(record["n_cases"], "n_cases", where, 1),
        seed=_parse_int(record["seed"], "seed", where, 0),
        roc_auc=_parse_roc(record["roc_auc"], where),
    )


def _read_text(source: Source) -> str:
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            return source.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise ValidationError(f"input is not valid UTF-8: {exc}") from None
    return source


def _iter_csv(text: str):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("line 1: missing CSV header") from None
    header = [h.strip().lower() for h in header]
    if sorted(header) != sorted(FIELDS):
        raise ValidationError(f"line 1: header must contain exactly {','.join(FIELDS)}, got {','.join(header)}")
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ValidationError(f"line {line}: expected {len(header)} fields, got {len(row)}")
        yield f"line {line}", dict(zip(header, row))


def _iter_json(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(doc, list):
        raise ValidationError("JSON input must be an array of objects")
    for i, rec in enumerate(doc, start=1):
        where = f"record {i}"
        if not isinstance(rec, dict):
            raise ValidationError(f"{where}: expected an object, got {type(rec).__name__}")
        missing = [f for f in FIELDS if f not in rec]
        extra = sorted(set(rec) - set(FIELDS))
        if missing:
            raise ValidationError(f"{where}: missing field '{missing[0]}'")
        if extra:
            raise ValidationError(f"{where}: unknown field '{extra[0]}'")
        yield where, rec


def ingest(source: Source, format: str = "csv") -> List[ExperimentPoint]:
    """Parse and validate experiment rows, preserving input order.

    Raises :class:`ValidationError` on the first malformed row (with its
    1-based line or record number and the offending field) or on a
    repeated ``(pathology, model, n_cases, seed)`` key.
    """
    fmt = format.lower()
    if fmt not in ("csv", "json"):
        raise ValidationError(f"unsupported format {format!r}; expected csv or json")
    text = _read_text(source)
    rows = _iter_csv(text) if fmt == "csv" else _iter_json(text)
    out: List[ExperimentPoint] = []
    seen: Dict[tuple, str] = {}
    for where, record in rows:
        pt = _make_point(record, where)
        if pt.key in seen:
            raise ValidationError(
                f"{where}: duplicate key pathology={pt.pathology} model={pt.model} "
                f"n_cases={pt.n_cases} seed={pt.seed} (first seen at {seen[pt.key]})"
            )
        seen[pt.key] = where
        out.append(pt)
    return out


def to_csv(points: Iterable[ExperimentPoint]) -> str:
    """Serialize to the CSV layout; ``repr`` floats so values round-trip exactly."""
    buf = io.StringIO()
    buf.write(",".join(FIELDS) + "\n")
    for p in points:
        buf.write(f"{p.pathology},{p.model},{p.n_cases},{p.seed},{p.roc_auc!r}\n")
    return buf.getvalue()


def to_json(points: Iterable[ExperimentPoint]) -> str:
    return json.dumps([p.as_dict() for p in points], indent=1) + "\n"


def aggregate(points: Sequence[ExperimentPoint]) -> List[LearningCurveSeries]:
    """Average replicates per training size, one series per (pathology, model).

    Sums are exact (``math.fsum``), so the result does not depend on row order.
    """
    if not points:
        raise InsufficientDataError("cannot aggregate an empty set of experiments")
    groups: Dict[Tuple[str, str], Dict[int, List[float]]] = defaultdict(lambda: defaultdict(list))
    for p in points:
        groups[(p.pathology, p.model)][p.n_cases].append(p.roc_auc)

    series = []
    for (pathology, model), by_n in sorted(groups.items()):
        curve_points = []
        raw = []
        for n in sorted(by_n):
            values = sorted(by_n[n])
            k = len(values)
            mean = math.fsum(values) / k
            var = math.fsum((v - mean) ** 2 for v in values) / k
            curve_points.append(CurvePoint(n, mean, math.sqrt(var), k))
            raw.extend((n, v) for v in values)
        series.append(LearningCurveSeries(pathology, model, tuple(curve_points), tuple(raw)))
    return series


def restrict(series: LearningCurveSeries, cutoff: int) -> LearningCurveSeries:
    """Keep the points with ``n_cases <= cutoff``."""
    kept = tuple(p for p in series.points if p.n_cases <= cutoff)
    if not kept:
        raise InsufficientDataError(
            f"no points of {series.pathology}/{series.model} at n_cases <= {cutoff} "
            f"(smallest is {series.points[0].n_cases})"
        )
    raw = tuple(r for r in series.raw if r[0] <= cutoff)
    return LearningCurveSeries(series.pathology, series.model, kept, raw)
