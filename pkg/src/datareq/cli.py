"""Command-line interface: ``datareq {bound,curve,simulate,invert,relevant}``.

All randomness flows from ``--seed``; without it a fixed default is used, so
two identical invocations always print identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .bounds import ea_g_lower_bound, ea_uniform, min_training_size, old_overall_bound
from .core_math import AccuracyEstimate, Method
from .distributions import (
    BinDistribution,
    expected_relevant_instances,
    load_weights,
    uniform_weights,
    zipf_relevant_approx,
    zipf_weights,
)
from .exceptions import UnreachableTargetError
from .simulator import (
    DEFAULT_M_GRID,
    DEFAULT_SEED,
    THEORY_SERIES,
    CurveSeries,
    SimulationConfig,
    run,
    theoretical_curves,
)

CSV_HEADER = ("series", "m", "value", "ci_half_width", "method")
DEFAULT_BINS = 10000
DEFAULT_P = 0.9


def fmt(x: float) -> str:
    return f"{x:.12g}"


# -- flag types ---------------------------------------------------------------

def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _pos_int(text: str) -> int:
    v = _nonneg_int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _reps(text: str) -> int:
    v = _nonneg_int(text)
    if v < 2:
        raise argparse.ArgumentTypeError(f"reps must be >= 2 (a confidence interval needs variance), got {v}")
    return v


def _prob(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (0.5 <= v <= 1.0):
        raise argparse.ArgumentTypeError(f"p must be in [0.5, 1], got {text}")
    return v


def _target(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (0.5 <= v <= 1.0):
        raise argparse.ArgumentTypeError(f"target must be in [0.5, 1], got {text}")
    return v


def _grid(text: str) -> tuple[int, ...]:
    try:
        values = tuple(_nonneg_int(part.strip()) for part in text.split(","))
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(f"bad --grid {text!r}: {exc}") from None
    if any(b <= a for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError("--grid must be strictly increasing")
    return values


def _series(text: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    if not names:
        raise argparse.ArgumentTypeError("select at least one series")
    bad = [n for n in names if n not in THEORY_SERIES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown series {bad}; choose from {','.join(THEORY_SERIES)}")
    return names


def _dist_spec(text: str) -> str:
    if text in ("uniform", "zipf") or (text.startswith("custom:") and len(text) > len("custom:")):
        return text
    raise argparse.ArgumentTypeError(f"--dist must be uniform, zipf or custom:<path>, got {text!r}")


def _resolve_grid(args) -> tuple[int, ...]:
    if args.grid is not None:
        return args.grid
    if args.m_max is not None:
        steps = args.m_steps if args.m_steps is not None else len(DEFAULT_M_GRID)
        if steps < 2:
            return (args.m_max,)
        return tuple(sorted({int(round(x)) for x in np.linspace(0, args.m_max, steps)}))
    return DEFAULT_M_GRID


def _resolve_dist(spec: str, bins: int | None) -> BinDistribution:
    if spec.startswith("custom:"):
        dist = load_weights(spec[len("custom:"):])
        if bins is not None and bins != dist.num_bins:
            raise ValueError(f"--bins {bins} disagrees with {dist.num_bins} weights in the custom file")
        return dist
    n = bins if bins is not None else DEFAULT_BINS
    return zipf_weights(n) if spec == "zipf" else uniform_weights(n)


# -- output -------------------------------------------------------------------

def series_to_csv(series: Sequence[CurveSeries], comments: Sequence[str] = (), extra=None) -> str:
    """Render series as CSV; ``extra`` maps (label, m) to trailing ``std_dev`` cells."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER + (("std_dev",) if extra is not None else ()))
    for s in series:
        for pt in s.points:
            row = [s.label, pt.m, fmt(pt.value), "" if pt.ci_half_width is None else fmt(pt.ci_half_width), s.method]
            if extra is not None:
                row.append(fmt(extra[(s.label, pt.m)]))
            writer.writerow(row)
    return buf.getvalue()


def series_to_json(series: Sequence[CurveSeries], metadata=None, extra=None) -> str:
    out = []
    for s in series:
        points = []
        for pt in s.points:
            d = {"m": pt.m, "value": pt.value}
            if pt.ci_half_width is not None:
                d["ci_half_width"] = pt.ci_half_width
            if extra is not None:
                d["std_dev"] = extra[(s.label, pt.m)]
            points.append(d)
        obj = {"label": s.label, "method": s.method, "points": points}
        if metadata is not None:
            obj["metadata"] = metadata
        out.append(obj)
    return json.dumps(out, indent=2) + "\n"


def read_csv_records(text: str) -> list[dict]:
    """Parse CSV written by this tool back into typed records."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    records = []
    for row in csv.DictReader(lines):
        rec = {
            "series": row["series"],
            "m": int(row["m"]),
            "value": float(row["value"]),
            "ci_half_width": float(row["ci_half_width"]) if row["ci_half_width"] else None,
            "method": row["method"],
        }
        if row.get("std_dev"):
            rec["std_dev"] = float(row["std_dev"])
        records.append(rec)
    return records


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- commands -----------------------------------------------------------------

def cmd_bound(args) -> int:
    if args.method == "old":
        est = AccuracyEstimate(old_overall_bound(args.m, args.bins, args.p), Method.OLD_BOUND)
    elif args.method == "exact":
        est = ea_uniform(args.m, args.bins, args.p, args.trunc_eps)
    else:
        est = ea_g_lower_bound(args.m, args.bins, args.p)
    line = f"{fmt(est.value)}\t{est.method.value}"
    if est.detail:
        line += f"\t{est.detail}"
    print(line)
    return 0


def cmd_curve(args) -> int:
    grid = _resolve_grid(args)
    series = theoretical_curves(args.bins, args.p, grid, args.series)
    if args.format == "csv":
        text = series_to_csv(series)
    else:
        text = series_to_json(series)
    _emit(text, args.out)
    return 0


def cmd_simulate(args) -> int:
    dist = _resolve_dist(args.dist, args.bins)
    config = SimulationConfig(
        num_bins=dist.num_bins,
        distribution=dist,
        majority_prob=args.p,
        m_grid=_resolve_grid(args),
        repetitions=args.reps,
        test_size=args.test_size,
        master_seed=args.seed,
    )
    points = run(config, workers=args.workers)
    label = dist.label
    series = [CurveSeries(label, Method.SIMULATED.value,
                          tuple((pt.m, pt.mean_accuracy, pt.ci_half_width) for pt in points))]
    std = {(label, pt.m): pt.std_dev for pt in points}
    meta = {
        "seed": args.seed,
        "bins": dist.num_bins,
        "p": args.p,
        "reps": args.reps,
        "test_size": args.test_size,
        "dist": args.dist,
    }
    if args.format == "csv":
        comments = [" ".join(f"{k}={v}" for k, v in meta.items())]
        text = series_to_csv(series, comments, extra=std)
    else:
        text = series_to_json(series, metadata=meta, extra=std)
    _emit(text, args.out)
    return 0


def cmd_invert(args) -> int:
    try:
        m = min_training_size(args.target, args.bins, args.p)
    except UnreachableTargetError as exc:
        print(f"error: target {exc.target:g} unreachable; asymptote {exc.asymptote:g}", file=sys.stderr)
        return 1
    print(m)
    return 0


def cmd_relevant(args) -> int:
    dist = _resolve_dist(args.dist, args.bins)
    print(f"exact\t{fmt(expected_relevant_instances(dist, args.m))}")
    if dist.kind.value == "zipf":
        try:
            print(f"approx\t{fmt(zipf_relevant_approx(args.m, dist.num_bins))}")
        except ValueError as exc:
            print(f"approx\tundefined ({exc})")
    return 0


# -- parser -------------------------------------------------------------------

def _add_grid_flags(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid", type=_grid, help="comma-separated training sizes, e.g. 0,1000,5000")
    g.add_argument("--m-max", type=_nonneg_int, help="largest training size of an evenly spaced grid")
    p.add_argument("--m-steps", type=_pos_int, help="number of points with --m-max (default 11)")


def _add_output_flags(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="datareq",
        description="Training-data requirements of a mode-based learner.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="one accuracy estimate at a single training size")
    p.add_argument("--m", type=_nonneg_int, required=True)
    p.add_argument("--bins", type=_pos_int, default=DEFAULT_BINS)
    p.add_argument("--p", type=_prob, default=DEFAULT_P)
    p.add_argument("--method", choices=("old", "exact", "glb"), default="exact")
    p.add_argument("--trunc-eps", type=float, default=1e-12)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("curve", help="theoretical curves over a grid of training sizes")
    p.add_argument("--bins", type=_pos_int, default=DEFAULT_BINS)
    p.add_argument("--p", type=_prob, default=DEFAULT_P)
    p.add_argument("--series", type=_series, default=THEORY_SERIES,
                   help=f"comma-separated subset of {','.join(THEORY_SERIES)}")
    _add_grid_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("simulate", help="Monte Carlo accuracy with confidence intervals")
    p.add_argument("--bins", type=_pos_int, default=None,
                   help=f"number of bins (default {DEFAULT_BINS}; taken from the file for custom)")
    p.add_argument("--p", type=_prob, default=DEFAULT_P)
    p.add_argument("--dist", type=_dist_spec, default="uniform", help="uniform, zipf or custom:<path>")
    p.add_argument("--reps", type=_reps, default=30)
    p.add_argument("--test-size", type=_pos_int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=_pos_int, default=1)
    _add_grid_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("invert", help="smallest training size reaching a target accuracy")
    p.add_argument("--target", type=_target, required=True)
    p.add_argument("--bins", type=_pos_int, default=DEFAULT_BINS)
    p.add_argument("--p", type=_prob, default=DEFAULT_P)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("relevant", help="expected training instances sharing a test instance's bin")
    p.add_argument("--m", type=_nonneg_int, required=True)
    p.add_argument("--bins", type=_pos_int, default=None)
    p.add_argument("--dist", type=_dist_spec, default="uniform")
    p.set_defaults(func=cmd_relevant)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
