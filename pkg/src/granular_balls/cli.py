"""Command-line front end: generate, classify, sample, bench.

Exit codes: 0 on success, 1 on data or runtime errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .bench import emit_report, run_noise_sweep
from .dataset import DataError, Dataset, column_bounds, load_csv, min_max_normalize, read_csv_rows
from .gbknn import GbknnModel, accuracy, predict_batch
from .gbs import DEFAULT_PURITY_GRID, SampleMode, sample_dataset
from .generation import GenerationConfig, Method, generate
from .granule import BallModel, RadiusMode, coverage_objective

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _label_col(text):
    return int(text) if text.lstrip("-").isdigit() else text


def _data_args(p):
    p.add_argument("--input", required=True, help="CSV file with features and a label column")
    p.add_argument("--label-col", type=_label_col, default=None,
                   help="label column index or header name (default: last column)")
    p.add_argument("--header", action="store_true", help="first row is a header")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="granular-balls",
                                     description="Granular-ball generation, classification and sampling.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build a ball model from a CSV file")
    _data_args(g)
    g.add_argument("--method", default="accelerated", help="original, accelerated or adaptive")
    g.add_argument("--purity", type=float, default=None,
                   help="purity threshold (default 1.0; not allowed with adaptive)")
    g.add_argument("--radius", choices=[m.value for m in RadiusMode], default="mean")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--adaptive-rule", choices=["or", "and"], default="or")
    g.add_argument("--no-normalize", action="store_true", help="skip min-max scaling")
    g.add_argument("--no-members", action="store_true", help="omit member indices from the model")
    g.add_argument("--out", required=True, help="model JSON path")

    c = sub.add_parser("classify", help="predict a labelled CSV with a ball model")
    _data_args(c)
    c.add_argument("--model", required=True)
    c.add_argument("--ball-distance", choices=["radius", "center"], default="radius")
    c.add_argument("--out", required=True, help="predictions CSV path")
    c.add_argument("--metrics", default=None, help="accuracy JSON path (default: <out>.json)")

    s = sub.add_parser("sample", help="reduce a CSV file with a ball model")
    _data_args(s)
    s.add_argument("--model", required=True)
    s.add_argument("--mode", choices=[m.value for m in SampleMode], default="balanced")
    s.add_argument("--out", required=True, help="reduced CSV path")
    s.add_argument("--manifest", default=None, help="manifest JSON path (default: <out>.json)")

    b = sub.add_parser("bench", help="repeated holdout experiments and noise sweeps")
    b.add_argument("--input", required=True, action="append", help="CSV file (repeatable)")
    b.add_argument("--label-col", type=_label_col, default=None)
    b.add_argument("--header", action="store_true")
    b.add_argument("--methods", default="accelerated",
                   help="comma list of original, accelerated, adaptive, knn")
    b.add_argument("--pipeline", choices=["gbknn", "gbs"], default="gbknn")
    b.add_argument("--purity", type=float, default=None,
                   help="purity threshold for the gbknn pipeline (default 1.0)")
    b.add_argument("--purity-grid", type=_floats, default=None,
                   help="purity values searched by the gbs pipeline")
    b.add_argument("--radius", choices=[m.value for m in RadiusMode], default="mean")
    b.add_argument("--ball-distance", choices=["radius", "center"], default="radius")
    b.add_argument("--noise", type=_floats, default=[0.0], help="comma list of noise rates")
    b.add_argument("--repeats", type=int, default=10)
    b.add_argument("--holdout", type=float, default=0.1)
    b.add_argument("--knn-k", type=int, default=1)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--no-normalize", action="store_true")
    b.add_argument("--timing", action="store_true",
                   help="record wall times (makes the report machine-dependent)")
    b.add_argument("--format", choices=["json", "csv", "markdown"], default="json")
    b.add_argument("--out", default=None, help="report path (default: standard output)")
    return parser


def _load(args, class_names=None):
    return load_csv(args.input, args.label_col, args.header, class_names)


def _bounds_doc(data):
    lo, hi = column_bounds(data)
    return {"min": [float(v) for v in lo], "max": [float(v) for v in hi]}


def _apply_model_bounds(data: Dataset, model: BallModel) -> Dataset:
    norm = model.normalization
    if data.d != model.d:
        raise DataError(f"data has {data.d} features, model expects {model.d}")
    if not norm:
        return data
    return min_max_normalize(data, (np.asarray(norm["min"]), np.asarray(norm["max"])))


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8", newline="")


def cmd_generate(args) -> int:
    method = Method.parse(args.method)
    if method is Method.ADAPTIVE and args.purity is not None:
        raise UsageError("--purity cannot be combined with --method adaptive")
    purity = None if method is Method.ADAPTIVE else (1.0 if args.purity is None else args.purity)
    config = GenerationConfig(method, purity, args.radius, args.seed,
                              adaptive_rule=args.adaptive_rule)
    data = _load(args)
    norm = None
    if not args.no_normalize:
        norm = _bounds_doc(data)
        data = min_max_normalize(data)
    t0 = time.perf_counter()
    model = generate(data, config)
    ms = (time.perf_counter() - t0) * 1000.0
    model.normalization = norm
    model.save(args.out, members=not args.no_members)
    cov = coverage_objective(model, data.n)
    print(f"balls: {model.m}")
    print(f"objective: {cov.objective:.6f}")
    print(f"wall_time_ms: {ms:.1f}")
    return 0


def cmd_classify(args) -> int:
    model = BallModel.load(args.model)
    data = _load(args, model.class_names or None)
    data = _apply_model_bounds(data, model)
    pred = predict_batch(GbknnModel(model, args.ball_distance), data.features)
    names = list(model.class_names) or [str(i) for i in range(int(pred.max()) + 1)]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "predicted", "actual"])
        for i, (p, t) in enumerate(zip(pred, data.labels)):
            w.writerow([i, names[p], names[t] if t < len(names) else t])
    acc = accuracy(pred, data.labels)
    metrics = {"accuracy": acc, "n": int(data.n), "correct": int(np.sum(pred == data.labels))}
    _write(args.metrics or f"{args.out}.json", json.dumps(metrics, indent=1, sort_keys=True) + "\n")
    print(f"accuracy: {acc:.6f}")
    return 0


def cmd_sample(args) -> int:
    model = BallModel.load(args.model)
    data = _apply_model_bounds(_load(args, model.class_names or None), model)
    if any(b.members is None for b in model.balls):
        raise DataError("sampling needs a model saved with member indices")
    result = sample_dataset(data, model, SampleMode(args.mode))
    header, rows, _ = read_csv_rows(args.input, args.header)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for i in result.selected:
            w.writerow(rows[i])
    manifest = {
        "mode": result.mode.value,
        "n_source": result.n_source,
        "n_selected": int(result.selected.size),
        "reduction_ratio": result.reduction_ratio,
        "retained": int(result.retained.size),
        "per_ball_counts": {str(k): int(v.size) for k, v in result.per_ball.items()},
    }
    _write(args.manifest or f"{args.out}.json", json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    print(f"selected: {result.selected.size} of {result.n_source}")
    print(f"reduction_ratio: {result.reduction_ratio:.6f}")
    return 0


def cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise UsageError("--methods is empty")
    for m in methods:
        if m != "knn":
            try:
                Method.parse(m)
            except ValueError:
                raise UsageError(f"unknown method {m!r}") from None
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    if not 0 < args.holdout < 1:
        raise UsageError("--holdout must be in (0, 1)")
    if any(not 0 <= r < 1 for r in args.noise):
        raise UsageError("noise rates must be in [0, 1)")
    if args.pipeline == "gbknn":
        if args.purity_grid is not None:
            raise UsageError("--purity-grid applies to the gbs pipeline; use --purity")
        grid = [1.0 if args.purity is None else args.purity]
    else:
        if args.purity is not None:
            raise UsageError("--purity applies to the gbknn pipeline; use --purity-grid")
        grid = args.purity_grid or list(DEFAULT_PURITY_GRID)
    if any(not 0 < p <= 1 for p in grid):
        raise UsageError("purity values must be in (0, 1]")

    reports = []
    for path in args.input:
        data = load_csv(path, args.label_col, args.header)
        if not args.no_normalize:
            data = min_max_normalize(data)
        reports += run_noise_sweep(data, methods, args.noise, args.repeats, args.holdout,
                                   args.seed, Path(path).stem, args.pipeline, grid,
                                   args.radius, args.knn_k, args.ball_distance, args.timing)
    text = emit_report(reports, args.format)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {"generate": cmd_generate, "classify": cmd_classify, "sample": cmd_sample,
             "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
