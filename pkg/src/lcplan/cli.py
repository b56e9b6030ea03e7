"""``lcplan`` command-line interface.

Exit status: 0 on success, 1 on data/validation errors, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from typing import Dict, List, Optional, Sequence

from . import __version__
from .analysis import build_report, extrapolation_mae, render_table, slope_correlation
from .curve import DEFAULT_CAP, PowerLawCurve, slope
from .errors import InsufficientDataError, LcplanError
from .experiments import aggregate, ingest, to_csv, to_json
from .fitting import DEFAULT_CONFIG, FitConfig, fit_with_cutoff
from .planner import (
    DEFAULT_SCHEDULE,
    DEFAULT_STABILITY_TOL,
    DEFAULT_WINDOW,
    budget_for,
    next_action,
    split_sizes,
)
from .report import document, learning_curve_tsv, mae_tsv, slope_tsv
from .synth import SynthSpec, generate


class UsageError(Exception):
    pass


def _int_list(text: str) -> List[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", default="-", metavar="PATH", help="experiments file; '-' reads stdin")
    p.add_argument("--format", choices=("csv", "json"), default=None, help="input format (default: from extension, else csv)")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", default=None, metavar="PATH", help="output file (default: stdout)")


def _add_fit_flags(p: argparse.ArgumentParser, cutoff: bool = True) -> None:
    if cutoff:
        p.add_argument("--cutoff", type=int, default=50, help="largest n_cases used in each fit (default 50)")
    p.add_argument("--raw-points", action="store_true", help="fit every replicate instead of seed means")
    p.add_argument("--workers", type=int, default=1, help="threads for per-series fits")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcplan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lcplan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("fit", help="fit a power law per (pathology, model)")
    _add_input(p)
    _add_output(p)
    _add_fit_flags(p)

    p = sub.add_parser("predict-n", help="plateau and n@threshold table")
    _add_input(p)
    _add_output(p)
    _add_fit_flags(p)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--table", action="store_true", help="emit a TSV table instead of JSON")

    p = sub.add_parser("slope", help="fitted learning-curve slope per series")
    _add_input(p)
    _add_output(p)
    _add_fit_flags(p)
    p.add_argument("--slope-n", type=int, default=5)

    p = sub.add_parser("analyze-corr", help="early slope vs observed plateau correlation")
    _add_input(p)
    _add_output(p)
    _add_fit_flags(p)
    p.add_argument("--slope-n", type=int, default=5)

    p = sub.add_parser("analyze-mae", help="extrapolation MAE per fit cutoff")
    _add_input(p)
    _add_output(p)
    _add_fit_flags(p, cutoff=False)
    p.add_argument("--cutoffs", type=_int_list, default=[20, 40])

    p = sub.add_parser("plan", help="labeling budgets, split sizes and next-step decisions")
    p.add_argument("--input", default=None, metavar="PATH", help="experiments file for next-step decisions")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    _add_output(p)
    p.add_argument("--n-positive", type=int, default=None, help="budget a single size instead of the schedule")
    p.add_argument("--negatives-available", type=int, default=None, help="negative pool size (default: unlimited)")
    p.add_argument("--ratio", type=int, default=5)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--tol", type=float, default=DEFAULT_STABILITY_TOL)
    p.add_argument("--raw-points", action="store_true")

    p = sub.add_parser("simulate", help="synthetic experiments from a known curve")
    _add_output(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-seeds", type=int, default=10)
    p.add_argument("--schedule", type=_int_list, default=list(DEFAULT_SCHEDULE.sizes))
    p.add_argument("--pathology", default="synthetic")
    p.add_argument("--model", default="synthetic")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.add_argument("--no-clamp", action="store_true")

    p = sub.add_parser("export-plot", help="TSV plot data for curves, slope scatter and MAE")
    _add_input(p)
    p.add_argument("--output", required=True, metavar="DIR", help="directory for the TSV files")
    _add_fit_flags(p)
    p.add_argument("--cutoffs", type=_int_list, default=[20, 35, 50])
    p.add_argument("--slope-n", type=int, default=5)
    return parser


def _validate(args: argparse.Namespace) -> None:
    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise UsageError(msg)

    if hasattr(args, "threshold"):
        need(0.0 < args.threshold < 1.0, f"--threshold must lie in (0, 1), got {args.threshold}")
    if hasattr(args, "cap"):
        need(args.cap >= 1, f"--cap must be >= 1, got {args.cap}")
    if hasattr(args, "cutoff"):
        need(args.cutoff >= 1, f"--cutoff must be >= 1, got {args.cutoff}")
    if hasattr(args, "cutoffs"):
        need(all(c >= 1 for c in args.cutoffs), "--cutoffs must be positive")
        need(args.cutoffs == sorted(args.cutoffs), "--cutoffs must be sorted ascending")
    if hasattr(args, "slope_n"):
        need(args.slope_n >= 1, f"--slope-n must be >= 1, got {args.slope_n}")
    if hasattr(args, "workers"):
        need(args.workers >= 1, f"--workers must be >= 1, got {args.workers}")
    if args.command == "plan":
        need(args.ratio >= 1, f"--ratio must be >= 1, got {args.ratio}")
        need(args.n_positive is None or args.n_positive >= 1, "--n-positive must be >= 1")
        need(args.negatives_available is None or args.negatives_available >= 0, "--negatives-available must be >= 0")
        need(args.window >= 2, f"--window must be >= 2, got {args.window}")
        need(args.tol >= 0, f"--tol must be >= 0, got {args.tol}")
    if args.command == "simulate":
        need(args.sigma >= 0, f"--sigma must be >= 0, got {args.sigma}")
        need(0 <= args.seed < 2**64, "--seed must be an unsigned 64-bit integer")
        need(args.n_seeds >= 1, "--n-seeds must be >= 1")


def _read_points(path: str, fmt: Optional[str]):
    if fmt is None:
        fmt = "json" if path.lower().endswith(".json") else "csv"
    if path == "-":
        data = sys.stdin.buffer.read()
    else:
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise LcplanError(f"cannot read {path}: {exc.strerror}") from None
    return ingest(data, fmt)


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".lcplan-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _config(args) -> FitConfig:
    if getattr(args, "raw_points", False):
        return FitConfig(fit_raw_points=True)
    return DEFAULT_CONFIG


def _series(args):
    return aggregate(_read_points(args.input, args.format))


def cmd_fit(args) -> str:
    config = _config(args)
    fits, excluded = [], []
    for s in _series(args):
        try:
            result = fit_with_cutoff(s.fit_points(raw=config.fit_raw_points), args.cutoff, config)
        except InsufficientDataError as exc:
            excluded.append({"pathology": s.pathology, "model": s.model, "reason": str(exc)})
            continue
        fits.append({"pathology": s.pathology, "model": s.model, "n_max": s.n_max, **result.as_dict()})
    if not fits:
        reason = excluded[0]["reason"] if excluded else "no series"
        raise InsufficientDataError(f"no series could be fitted with cutoff {args.cutoff}: {reason}")
    return document("fit", {"cutoff": args.cutoff, "fit": config.as_dict()}, fits=fits, excluded=excluded)


def cmd_predict_n(args) -> str:
    config = _config(args)
    rows = build_report(_series(args), args.cutoff, args.threshold, args.cap, config, args.workers)
    if args.table:
        return render_table(rows)
    skipped = sum(r.skipped for r in rows)
    return document(
        "predict-n",
        {"cutoff": args.cutoff, "threshold": args.threshold, "cap": args.cap, "fit": config.as_dict()},
        rows=[r.as_dict() for r in rows],
        exclusions={"skipped": skipped},
    )


def cmd_slope(args) -> str:
    config = _config(args)
    out, excluded = [], []
    for s in _series(args):
        try:
            result = fit_with_cutoff(s.fit_points(raw=config.fit_raw_points), args.cutoff, config)
        except InsufficientDataError as exc:
            excluded.append({"pathology": s.pathology, "model": s.model, "reason": str(exc)})
            continue
        out.append(
            {
                "pathology": s.pathology,
                "model": s.model,
                "slope": slope(result.curve, args.slope_n),
                **result.curve.as_dict(),
            }
        )
    return document("slope", {"cutoff": args.cutoff, "slope_n": args.slope_n}, slopes=out, excluded=excluded)


def cmd_analyze_corr(args) -> str:
    config = _config(args)
    study = slope_correlation(_series(args), args.cutoff, args.slope_n, config, args.workers)
    return document(
        "analyze-corr",
        {"cutoff": args.cutoff, "slope_n": args.slope_n, "fit": config.as_dict()},
        correlation=study.as_dict(),
    )


def cmd_analyze_mae(args) -> str:
    config = _config(args)
    study = extrapolation_mae(_series(args), args.cutoffs, config, args.workers)
    return document("analyze-mae", {"cutoffs": args.cutoffs, "fit": config.as_dict()}, mae=study.as_dict())


def cmd_plan(args) -> str:
    sizes = [args.n_positive] if args.n_positive is not None else list(DEFAULT_SCHEDULE.sizes)
    budgets = []
    for n in sizes:
        available = args.negatives_available if args.negatives_available is not None else n * args.ratio
        b = budget_for(n, available, args.ratio)
        entry = b.as_dict()
        if b.total >= 10:
            train, val, test = split_sizes(b.total)
            entry["split"] = {"train": train, "validation": val, "test": test}
        budgets.append(entry)
    decisions = []
    if args.input is not None:
        config = FitConfig(fit_raw_points=args.raw_points)
        for s in aggregate(_read_points(args.input, args.format)):
            try:
                d = next_action(s, args.threshold, args.window, args.tol, config, cap=args.cap)
            except InsufficientDataError as exc:
                decisions.append({"pathology": s.pathology, "model": s.model, "action": None, "reason": str(exc)})
                continue
            decisions.append({"pathology": s.pathology, "model": s.model, **d.as_dict()})
    return document(
        "plan",
        {
            "ratio": args.ratio,
            "threshold": args.threshold,
            "window": args.window,
            "tol": args.tol,
            "cap": args.cap,
        },
        schedule=list(DEFAULT_SCHEDULE.sizes),
        budgets=budgets,
        decisions=decisions,
    )


def cmd_simulate(args) -> str:
    from .planner import SamplingSchedule

    spec = SynthSpec(
        true_curve=PowerLawCurve(args.alpha, args.beta, args.gamma),
        schedule=SamplingSchedule(tuple(args.schedule)),
        n_seeds=args.n_seeds,
        noise_sigma=args.sigma,
        rng_seed=args.seed,
        clamp=not args.no_clamp,
    )
    points = generate(spec, args.pathology, args.model)
    return to_json(points) if args.format == "json" else to_csv(points)


def cmd_export_plot(args) -> Dict[str, str]:
    config = _config(args)
    series = _series(args)
    files = {"learning_curves.tsv": learning_curve_tsv(series, [None, *args.cutoffs], config)}
    try:
        study = slope_correlation(series, args.cutoff, args.slope_n, config, args.workers)
    except LcplanError:
        study = None
    if study is not None:
        files["slope_vs_plateau.tsv"] = slope_tsv(study)
    files["mae_vs_cutoff.tsv"] = mae_tsv(extrapolation_mae(series, args.cutoffs, config, args.workers))
    return files


COMMANDS = {
    "fit": cmd_fit,
    "predict-n": cmd_predict_n,
    "slope": cmd_slope,
    "analyze-corr": cmd_analyze_corr,
    "analyze-mae": cmd_analyze_mae,
    "plan": cmd_plan,
    "simulate": cmd_simulate,
    "export-plot": cmd_export_plot,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _validate(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lcplan: error: {exc}", file=sys.stderr)
        return 2
    try:
        out = COMMANDS[args.command](args)
        if isinstance(out, dict):
            os.makedirs(args.output, exist_ok=True)
            for name, text in out.items():
                _write(os.path.join(args.output, name), text)
        else:
            _write(args.output, out)
    except (LcplanError, OSError) as exc:
        msg = " ".join(str(exc).split()) or type(exc).__name__
        print(f"lcplan: error: {msg}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
