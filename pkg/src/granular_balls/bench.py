"""Experiment harness: repeated holdout runs, timing comparisons and noise sweeps."""

from __future__ import annotations

import csv
import io
import json
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .dataset import Dataset, inject_label_noise
from .gbknn import GbknnModel, accuracy, knn_baseline, predict_batch
from .gbs import DEFAULT_PURITY_GRID, SampleMode, sample_dataset
from .generation import GenerationConfig, Method, generate

__all__ = [
    "RunReport",
    "holdout_split",
    "run_gbknn_experiment",
    "run_timing_comparison",
    "run_noise_sweep",
    "emit_report",
    "parse_report_json",
    "CSV_COLUMNS",
    "REPORT_VERSION",
]

REPORT_VERSION = 1
CSV_COLUMNS = ("dataset", "method", "radius_mode", "purity", "noise_rate", "mean_acc",
               "std_acc", "mean_balls", "mean_time_ms", "distance_evals", "seed")


@dataclass
class RunReport:
    """One row of a results table.

    ``purity_threshold`` is ``None`` for the adaptive method and for the raw
    kNN baseline. Timing fields are ``None`` when timing was not recorded.
    """

    dataset: str
    method: str
    pipeline: str
    radius_mode: str
    purity_threshold: float | None
    noise_rate: float
    repeats: int
    mean_accuracy: float
    per_repeat_accuracies: list
    mean_ball_count: float
    per_repeat_ball_counts: list
    mean_wall_time_ms: float | None
    median_wall_time_ms: float | None
    per_repeat_wall_time_ms: list | None
    distance_eval_count: float
    per_repeat_distance_evals: list
    seed: int
    purity_grid: list = field(default_factory=list)

    @property
    def std_accuracy(self) -> float:
        if len(self.per_repeat_accuracies) < 2:
            return 0.0
        return float(statistics.stdev(self.per_repeat_accuracies))

    @property
    def label(self) -> str:
        if self.method == "knn" or self.pipeline == "gbknn":
            return self.method
        return f"{self.method}-{self.pipeline}"


def _report(dataset, method, pipeline, radius_mode, purity, noise_rate, seed, accs, balls,
            times, evals, timing, grid=()):
    accs = [float(a) for a in accs]
    return RunReport(
        dataset=dataset,
        method=method,
        pipeline=pipeline,
        radius_mode=radius_mode,
        purity_threshold=None if purity is None else float(purity),
        noise_rate=float(noise_rate),
        repeats=len(accs),
        mean_accuracy=float(np.mean(accs)),
        per_repeat_accuracies=accs,
        mean_ball_count=float(np.mean(balls)) if balls else 0.0,
        per_repeat_ball_counts=[int(b) for b in balls],
        mean_wall_time_ms=float(np.mean(times)) if timing else None,
        median_wall_time_ms=float(np.median(times)) if timing else None,
        per_repeat_wall_time_ms=[float(t) for t in times] if timing else None,
        distance_eval_count=float(np.mean(evals)) if evals else 0.0,
        per_repeat_distance_evals=[int(e) for e in evals],
        seed=int(seed),
        purity_grid=[float(p) for p in grid],
    )


def holdout_split(n, fraction, seed, repeat):
    """Random (train, test) index split; the test part has ``round(fraction * n)`` rows."""
    if not 0 < fraction < 1:
        raise ValueError("holdout fraction must be in (0, 1)")
    rng = np.random.default_rng([int(seed), int(repeat), 0])
    perm = rng.permutation(n)
    n_test = min(n - 1, max(1, int(round(fraction * n))))
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def _workers():
    try:
        return max(1, int(os.environ.get("GB_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items, parallel=True):
    items = list(items)
    workers = _workers() if parallel else 1
    if workers == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _timed_generate(train, config):
    t0 = time.perf_counter()
    model = generate(train, config)
    return model, (time.perf_counter() - t0) * 1000.0


def run_gbknn_experiment(data: Dataset, config: GenerationConfig, repeats=10, holdout=0.1,
                         seed=0, name="data", ball_distance="radius", timing=True,
                         parallel=True) -> RunReport:
    """Generate balls on a random 90% and score GBkNN on the rest, ``repeats`` times.

    Repeat ``r`` uses split stream ``(seed, r)`` and generator seed ``seed + r``.
    Wall time covers ball generation only.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")

    def one(r):
        tr, te = holdout_split(data.n, holdout, seed, r)
        train = data.subset(tr)
        model, ms = _timed_generate(train, replace(config, seed=seed + r))
        pred = predict_batch(GbknnModel(model, ball_distance), data.features[te])
        return accuracy(pred, data.labels[te]), model.m, ms, model.counters["distance_evals"]

    rows = _map(one, range(repeats), parallel and not timing)
    accs, balls, times, evals = zip(*rows)
    return _report(name, config.method.value, "gbknn", config.radius_mode.value,
                   config.purity_threshold, 0.0, seed, accs, balls, times, evals, timing)


def run_timing_comparison(data: Dataset, configs, repeats=10, holdout=0.1, seed=0,
                          name="data") -> list:
    """Same splits and seeds for every config, run sequentially, with timings."""
    configs = list(configs)
    if len(configs) < 2:
        raise ValueError("a timing comparison needs at least two configs")
    return [run_gbknn_experiment(data, cfg, repeats, holdout, seed, name, timing=True,
                                 parallel=False) for cfg in configs]


def _config_for(method, purity, radius_mode, seed):
    method = Method.parse(method)
    if method is Method.ADAPTIVE:
        return GenerationConfig(method, None, radius_mode, seed)
    return GenerationConfig(method, purity, radius_mode, seed)


def run_noise_sweep(data: Dataset, methods, noise_rates, repeats=10, holdout=0.1, seed=0,
                    name="data", pipeline="gbs", purity_grid=DEFAULT_PURITY_GRID,
                    radius_mode="mean", knn_k=1, ball_distance="radius", timing=False,
                    parallel=True) -> list:
    """Label-noise robustness sweep.

    For every (method, rate) and repeat, noise is injected into the training
    part only; test labels stay clean. ``method`` may be a generator name or
    ``"knn"`` (raw kNN on the noisy training set). Generator methods run
    ``pipeline``: ``"gbs"`` (generate, sample, kNN) or ``"gbknn"``. Threshold
    methods are run for every purity in ``purity_grid`` and the purity with
    the best mean accuracy over the repeats is reported.

    Returns:
        one RunReport per (method, rate), methods-major.
    """
    if pipeline not in ("gbs", "gbknn"):
        raise ValueError(f"unknown pipeline {pipeline!r}")
    for rate in noise_rates:
        if not 0 <= rate < 1:
            raise ValueError(f"noise rate {rate} outside [0, 1)")
    grid = list(purity_grid)

    def prepare(rate, r):
        tr, te = holdout_split(data.n, holdout, seed, r)
        train, _ = inject_label_noise(data.subset(tr), rate, [int(seed), int(r), 1])
        return train, data.features[te], data.labels[te]

    reports = []
    for method in methods:
        for rate in noise_rates:
            if method == "knn":
                def one(r, rate=rate):
                    train, xq, yq = prepare(rate, r)
                    return accuracy(knn_baseline(train, xq, knn_k), yq)
                accs = _map(one, range(repeats), parallel)
                reports.append(_report(name, "knn", "knn", "-", None, rate, seed, accs, [],
                                       [0.0] * repeats, [], timing))
                continue
            purities = [None] if Method.parse(method) is Method.ADAPTIVE else grid

            def one(r, rate=rate, method=method):
                train, xq, yq = prepare(rate, r)
                rows = []
                for p in purities:
                    cfg = _config_for(method, p, radius_mode, seed + r)
                    model, ms = _timed_generate(train, cfg)
                    if pipeline == "gbs":
                        sample = sample_dataset(train, model, SampleMode.BALANCED)
                        reduced = train.subset(sample.selected)
                        pred = knn_baseline(reduced, xq, min(knn_k, reduced.n))
                    else:
                        pred = predict_batch(GbknnModel(model, ball_distance), xq)
                    rows.append((accuracy(pred, yq), model.m, ms,
                                 model.counters["distance_evals"]))
                return rows

            per_repeat = _map(one, range(repeats), parallel and not timing)
            means = [np.mean([per_repeat[r][g][0] for r in range(repeats)])
                     for g in range(len(purities))]
            g = int(np.argmax(means))
            accs, balls, times, evals = zip(*(per_repeat[r][g] for r in range(repeats)))
            reports.append(_report(name, Method.parse(method).value, pipeline, radius_mode,
                                   purities[g], rate, seed, accs, balls, times, evals, timing,
                                   grid if purities[0] is not None else ()))
    return reports


def _json_doc(reports):
    return {"version": REPORT_VERSION, "reports": [asdict(r) for r in reports]}


def parse_report_json(text) -> list:
    doc = json.loads(text)
    if doc.get("version") != REPORT_VERSION:
        raise ValueError(f"unsupported report version {doc.get('version')!r}")
    return [RunReport(**r) for r in doc["reports"]]


def _fmt(v, digits=4):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return str(v)


def _csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([
            r.dataset, r.label, r.radius_mode,
            "adaptive" if r.method == "adaptive" else _fmt(r.purity_threshold, 2),
            _fmt(r.noise_rate, 2), _fmt(r.mean_accuracy), _fmt(r.std_accuracy),
            _fmt(r.mean_ball_count, 1), _fmt(r.mean_wall_time_ms, 3),
            _fmt(r.distance_eval_count, 1), r.seed,
        ])
    return buf.getvalue()


def _markdown(reports):
    if not reports:
        return "| dataset |\n|---|\n"
    blocks = []
    rates = list(dict.fromkeys(r.noise_rate for r in reports))
    for rate in rates:
        rows = [r for r in reports if r.noise_rate == rate]
        datasets = list(dict.fromkeys(r.dataset for r in rows))
        labels = list(dict.fromkeys(r.label for r in rows))
        cell = {(r.dataset, r.label): r.mean_accuracy for r in rows}
        lines = []
        if len(rates) > 1 or rate:
            lines.append(f"noise rate {rate:g}\n")
        lines.append("| dataset | " + " | ".join(labels) + " |")
        lines.append("|---" * (len(labels) + 1) + "|")
        for ds in datasets:
            vals = [_fmt(cell.get((ds, lab))) for lab in labels]
            lines.append(f"| {ds} | " + " | ".join(vals) + " |")
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def emit_report(reports, fmt="json") -> str:
    """Render reports as ``json`` (lossless), ``csv`` or ``markdown``."""
    reports = list(reports)
    if fmt == "json":
        return json.dumps(_json_doc(reports), indent=1, sort_keys=True) + "\n"
    if fmt == "csv":
        return _csv(reports)
    if fmt in ("markdown", "md"):
        return _markdown(reports)
    raise ValueError(f"unknown report format {fmt!r}")
