"""Dataset container, CSV loading, normalization, folds and label noise."""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "DataError",
    "Dataset",
    "FoldSplit",
    "load_csv",
    "min_max_normalize",
    "column_bounds",
    "make_folds",
    "inject_label_noise",
    "make_gaussian_mixture",
]


class DataError(ValueError):
    """Raised when input data cannot be turned into a valid Dataset."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable feature matrix with dense integer labels.

    ``class_names`` is the side table mapping each integer label back to the
    string it was read from; it may be empty for synthetic data.
    """

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple = field(default=())

    def __post_init__(self):
        x = np.array(self.features, dtype=float, copy=True)
        y = np.array(self.labels, dtype=np.int64, copy=True)
        if x.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {x.shape}")
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise DataError(f"need n >= 1 and d >= 1, got shape {x.shape}")
        if y.shape != (x.shape[0],):
            raise DataError(f"labels shape {y.shape} does not match {x.shape[0]} rows")
        if not np.all(np.isfinite(x)):
            raise DataError("features contain NaN or Inf")
        if np.any(y < 0):
            raise DataError("labels must be non-negative integers")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def class_ids(self) -> np.ndarray:
        if self.class_names:
            return np.arange(len(self.class_names))
        return np.unique(self.labels)

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.class_names)

    def with_labels(self, labels) -> "Dataset":
        return Dataset(self.features, labels, self.class_names)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.features).tobytes())
        h.update(np.ascontiguousarray(self.labels).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class FoldSplit:
    fold_assignments: np.ndarray
    k_folds: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_assignments != fold)


def _resolve_label_column(label_col, header, width):
    if label_col is None:
        return width - 1
    if isinstance(label_col, str) and not label_col.lstrip("-").isdigit():
        if header is None:
            raise DataError(f"label column {label_col!r} given by name but file has no header")
        try:
            return header.index(label_col)
        except ValueError:
            raise DataError(f"label column {label_col!r} not in header {header}") from None
    col = int(label_col)
    if col < 0:
        col += width
    if not 0 <= col < width:
        raise DataError(f"label column {label_col} out of range for {width} columns")
    return col


def read_csv_rows(path, has_header=False):
    """Read a CSV file into (header, rows, line_numbers), checking arity."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            raw = [(i, row) for i, row in enumerate(csv.reader(fh), start=1) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    header = None
    if has_header and raw:
        header = [c.strip() for c in raw[0][1]]
        raw = raw[1:]
    if not raw:
        raise DataError(f"{path}: no data rows")
    width = len(header) if header is not None else len(raw[0][1])
    for line, row in raw:
        if len(row) != width:
            raise DataError(f"{path}: row {line} has {len(row)} columns, expected {width}")
    return header, [r for _, r in raw], [i for i, _ in raw]


def load_csv(path, label_col=None, has_header=False, class_names=None) -> Dataset:
    """Load a numeric CSV with one categorical label column.

    Args:
        path: CSV file (UTF-8, comma separated).
        label_col: column index (negative allowed) or header name; default last.
        has_header: whether the first non-empty row is a header.
        class_names: optional fixed label vocabulary. Labels are then encoded
            by position in it (unknown labels raise). Without it, labels are
            encoded 0..k-1 in order of first appearance.

    Row numbers in error messages are 1-based file lines; columns are 1-based.
    """
    header, rows, lines = read_csv_rows(path, has_header)
    width = len(rows[0])
    if width < 2:
        raise DataError(f"{path}: need at least one feature column and a label column")
    lc = _resolve_label_column(label_col, header, width)

    vocab = {name: i for i, name in enumerate(class_names)} if class_names is not None else {}
    fixed = class_names is not None
    feats = np.empty((len(rows), width - 1))
    labels = np.empty(len(rows), dtype=np.int64)
    for r, (row, line) in enumerate(zip(rows, lines)):
        j = 0
        for c, cell in enumerate(row):
            if c == lc:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric value {cell!r} at row {line}, column {c + 1}"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: non-finite value at row {line}, column {c + 1}")
            feats[r, j] = v
            j += 1
        name = row[lc].strip()
        if name == "":
            raise DataError(f"{path}: missing label at row {line}, column {lc + 1}")
        if name not in vocab:
            if fixed:
                raise DataError(f"{path}: unknown label {name!r} at row {line}")
            vocab[name] = len(vocab)
        labels[r] = vocab[name]
    names = tuple(class_names) if fixed else tuple(vocab)
    return Dataset(feats, labels, names)


def column_bounds(data: Dataset):
    """Per-column (min, max) of the features."""
    return data.features.min(axis=0), data.features.max(axis=0)


def min_max_normalize(data: Dataset, bounds=None) -> Dataset:
    """Map every feature column affinely onto [0, 1]; constant columns go to 0.

    ``bounds`` reuses (min, max) fitted on another dataset, e.g. to transform a
    test set with training statistics. Values outside the fitted range then
    fall outside [0, 1].
    """
    lo, hi = column_bounds(data) if bounds is None else (np.asarray(bounds[0]), np.asarray(bounds[1]))
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    x = np.where(span > 0, (data.features - lo) / safe, 0.0)
    return Dataset(x, data.labels, data.class_names)


def make_folds(data: Dataset, k_folds: int, seed=None) -> FoldSplit:
    """Stratified, seeded assignment of rows to ``k_folds`` folds.

    Rows are shuffled within each class and dealt round-robin, continuing the
    fold counter across classes, so fold sizes differ by at most one and each
    class is spread as evenly as its count allows.
    """
    if k_folds < 2:
        raise ValueError("k_folds must be >= 2")
    if k_folds > data.n:
        raise ValueError(f"k_folds={k_folds} exceeds n={data.n}")
    rng = np.random.default_rng(seed)
    order = np.concatenate(
        [rng.permutation(np.flatnonzero(data.labels == c)) for c in np.unique(data.labels)]
    )
    folds = np.empty(data.n, dtype=np.int64)
    folds[order] = np.arange(data.n) % k_folds
    return FoldSplit(folds, k_folds)


def noise_count(rate: float, n: int) -> int:
    # round first so that e.g. 0.29 * 100 = 28.999999999999996 counts as 29
    return int(math.floor(round(rate * n, 9)))


def inject_label_noise(data: Dataset, rate: float, seed=None):
    """Flip the labels of ``floor(rate * n)`` distinct random rows.

    Each flipped row gets a class drawn uniformly from the *other* classes.

    Returns:
        (Dataset, np.ndarray): the corrupted copy and the sorted flipped indices.
    """
    if not 0 <= rate < 1:
        raise ValueError(f"noise rate must be in [0, 1), got {rate}")
    count = noise_count(rate, data.n)
    if count == 0:
        return data, np.empty(0, dtype=np.int64)
    classes = data.class_ids
    if len(classes) < 2:
        raise ValueError("label noise needs at least two classes")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(data.n, size=count, replace=False))
    pos = np.searchsorted(classes, data.labels[idx])
    shift = rng.integers(1, len(classes), size=count)
    labels = data.labels.copy()
    labels[idx] = classes[(pos + shift) % len(classes)]
    return data.with_labels(labels), idx


def make_gaussian_mixture(n, d=2, separation=4.0, weights=(0.5, 0.5), seed=None) -> Dataset:
    """Isotropic unit-variance Gaussian classes with means spaced along axis 0.

    Class ``c`` is centred at ``c * separation`` on the first axis, so the
    Bayes error of adjacent classes is ``Phi(-separation / 2)``.
    """
    rng = np.random.default_rng(seed)
    w = np.asarray(weights, dtype=float)
    labels = rng.choice(len(w), size=n, p=w / w.sum())
    x = rng.standard_normal((n, d))
    x[:, 0] += labels * separation
    return Dataset(x, labels, tuple(str(c) for c in range(len(w))))
