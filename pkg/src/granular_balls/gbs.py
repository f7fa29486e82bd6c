"""Granular-ball sampling: keep the homogeneous points nearest each ball's axis tips."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .granule import BallModel, GranularBall

__all__ = [
    "SampleMode",
    "SampleResult",
    "axis_intersections",
    "sample_ball",
    "sample_dataset",
    "DEFAULT_PURITY_GRID",
]

# 0.54, 0.56, ..., 1.0
DEFAULT_PURITY_GRID = tuple(round(0.54 + 0.02 * i, 2) for i in range(24))


class SampleMode(str, enum.Enum):
    BALANCED = "balanced"
    IMBALANCED = "imbalanced"


@dataclass(frozen=True)
class SampleResult:
    """Indices kept by GBS.

    ``per_ball`` maps ball index to the points sampled from it. ``retained``
    holds minority-class points kept verbatim in IMBALANCED mode (empty
    otherwise); ``selected`` is the sorted union of both.
    """

    selected: np.ndarray
    per_ball: dict
    mode: SampleMode
    retained: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    n_source: int = 0

    @property
    def reduction_ratio(self) -> float:
        return self.selected.size / self.n_source if self.n_source else float("nan")


def axis_intersections(center, radius) -> np.ndarray:
    """The 2d points ``center +/- radius * e_j``, ordered (+e_0, -e_0, +e_1, ...)."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    c = np.asarray(center, dtype=float)
    d = c.shape[0]
    offsets = np.repeat(np.eye(d), 2, axis=0) * np.tile([radius, -radius], d)[:, None]
    return c + offsets


def sample_ball(data: Dataset, ball: GranularBall) -> np.ndarray:
    """For each axis tip, the same-label member nearest to it (ties: lowest index)."""
    if ball.members is None or ball.members.size == 0:
        raise ValueError("sampling needs a ball with member indices")
    members = np.sort(ball.members)
    same = members[data.labels[members] == ball.label]
    if same.size == 0:
        return same
    tips = axis_intersections(ball.center, ball.radius)
    x = data.features[same]
    dist = np.sqrt(((tips[:, None, :] - x[None, :, :]) ** 2).sum(axis=2))
    return np.unique(same[np.argmin(dist, axis=1)])


def sample_dataset(data: Dataset, model: BallModel, mode=SampleMode.BALANCED,
                   check_fingerprint=True) -> SampleResult:
    """Reduce ``data`` with the balls of ``model``.

    BALANCED samples every ball. IMBALANCED keeps every point outside the
    global majority class and samples only balls labelled with that class.
    """
    mode = SampleMode(mode)
    if check_fingerprint and model.dataset_fingerprint and \
            model.dataset_fingerprint != data.fingerprint():
        raise ValueError("ball model was not generated from this dataset (fingerprint mismatch)")
    retained = np.empty(0, dtype=np.int64)
    majority = None
    if mode is SampleMode.IMBALANCED:
        majority = int(np.argmax(np.bincount(data.labels)))
        retained = np.flatnonzero(data.labels != majority)
    per_ball = {}
    for i, ball in enumerate(model.balls):
        if majority is not None and ball.label != majority:
            continue
        per_ball[i] = sample_ball(data, ball)
    parts = [retained] + list(per_ball.values())
    selected = np.unique(np.concatenate(parts)) if parts else np.empty(0, dtype=np.int64)
    return SampleResult(selected.astype(np.int64), per_ball, mode, retained, data.n)
