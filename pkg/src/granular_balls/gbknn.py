"""Nearest-granular-ball classification and the plain kNN baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import Dataset, FoldSplit, make_folds
from .granule import BallModel

__all__ = [
    "GbknnModel",
    "predict",
    "predict_batch",
    "knn_baseline",
    "knn_cv_accuracy",
    "accuracy",
]

_CHUNK = 2048


@dataclass(frozen=True)
class GbknnModel:
    """Classifier over a ball model.

    ``ball_distance`` is ``"radius"`` (distance to the center minus the ball
    radius, the default) or ``"center"`` (plain center distance).
    """

    balls: BallModel
    ball_distance: str = "radius"

    def __post_init__(self):
        if self.balls.m < 1:
            raise ValueError("GBkNN needs at least one ball")
        if self.ball_distance not in ("radius", "center"):
            raise ValueError(f"ball_distance must be 'radius' or 'center', got {self.ball_distance!r}")

    @property
    def d(self) -> int:
        return self.balls.d


def predict_batch(model: GbknnModel, queries) -> np.ndarray:
    """Label of the nearest ball for every query row.

    Ties on the score go to the smaller radius, then to the lower ball index.
    """
    q = np.asarray(queries, dtype=float)
    if q.size == 0:
        return np.empty(0, dtype=np.int64)
    if q.ndim == 1:
        q = q[None, :]
    if q.shape[1] != model.d:
        raise ValueError(f"query dimension {q.shape[1]} != model dimension {model.d}")
    centers = model.balls.centers
    radii = model.balls.radii
    labels = model.balls.labels
    out = np.empty(q.shape[0], dtype=np.int64)
    for start in range(0, q.shape[0], _CHUNK):
        score = cdist(q[start:start + _CHUNK], centers)
        if model.ball_distance == "radius":
            score = score - radii
        best = score == score.min(axis=1, keepdims=True)
        r = np.where(best, radii, np.inf)
        best &= r == r.min(axis=1, keepdims=True)
        out[start:start + _CHUNK] = labels[np.argmax(best, axis=1)]
    return out


def predict(model: GbknnModel, query) -> int:
    """Label of the ball nearest to a single query vector."""
    q = np.asarray(query, dtype=float)
    if q.ndim != 1:
        raise ValueError("predict takes one d-vector; use predict_batch for matrices")
    return int(predict_batch(model, q[None, :])[0])


def knn_baseline(train: Dataset, test_queries, k=1) -> np.ndarray:
    """Full-search kNN with majority vote; ties go to the smaller class id.

    Neighbors at equal distance are taken in training-row order.
    """
    if k < 1 or k > train.n:
        raise ValueError(f"k must be in [1, {train.n}], got {k}")
    q = np.asarray(test_queries, dtype=float)
    if q.size == 0:
        return np.empty(0, dtype=np.int64)
    if q.ndim == 1:
        q = q[None, :]
    if q.shape[1] != train.d:
        raise ValueError(f"query dimension {q.shape[1]} != training dimension {train.d}")
    n_classes = int(train.labels.max()) + 1
    out = np.empty(q.shape[0], dtype=np.int64)
    for start in range(0, q.shape[0], _CHUNK):
        dist = cdist(q[start:start + _CHUNK], train.features)
        if k == 1:
            near = np.argmin(dist, axis=1)[:, None]
        else:
            near = np.argsort(dist, axis=1, kind="stable")[:, :k]
        votes = train.labels[near]
        counts = np.zeros((votes.shape[0], n_classes), dtype=np.int64)
        np.add.at(counts, (np.arange(votes.shape[0])[:, None], votes), 1)
        out[start:start + _CHUNK] = np.argmax(counts, axis=1)
    return out


def accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.size == 0:
        return float("nan")
    return float(np.mean(predicted == truth))


def knn_cv_accuracy(data: Dataset, k_values=(1, 3, 5, 7, 9), k_folds=10, seed=0,
                    folds: FoldSplit | None = None):
    """Stratified k-fold CV accuracy of the kNN baseline for each ``k``.

    Returns:
        (best_k, best_accuracy, {k: accuracy}). Ties pick the smaller k.
    """
    folds = folds or make_folds(data, k_folds, seed)
    scores = {}
    for k in k_values:
        correct = 0
        for f in range(folds.k_folds):
            tr, te = folds.train_indices(f), folds.test_indices(f)
            if k > tr.size:
                raise ValueError(f"k={k} exceeds training fold size {tr.size}")
            pred = knn_baseline(data.subset(tr), data.features[te], k)
            correct += int(np.sum(pred == data.labels[te]))
        scores[k] = correct / data.n
    best_k = max(scores, key=lambda k: (scores[k], -k))
    return best_k, scores[best_k], scores
