"""Granular-ball data model and per-ball mathematics."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Dataset

__all__ = [
    "RadiusMode",
    "GranularBall",
    "BallModel",
    "CoverageReport",
    "compute_center",
    "compute_radius",
    "majority_label_and_purity",
    "make_ball",
    "heterogeneous_overlap",
    "overlapping_pairs",
    "coverage_objective",
    "MODEL_VERSION",
]

MODEL_VERSION = 1


class RadiusMode(str, enum.Enum):
    MEAN = "mean"
    MAX = "max"


def _members(members) -> np.ndarray:
    idx = np.asarray(members, dtype=np.int64).ravel()
    if idx.size == 0:
        raise ValueError("a granular ball needs at least one member")
    return idx


def compute_center(data: Dataset, members) -> np.ndarray:
    """Arithmetic mean of the member rows."""
    return data.features[_members(members)].mean(axis=0)


def compute_radius(data: Dataset, members, center, mode=RadiusMode.MEAN) -> float:
    """Mean (default) or maximum Euclidean distance of members to ``center``."""
    dist = np.linalg.norm(data.features[_members(members)] - np.asarray(center, float), axis=1)
    return float(dist.max() if RadiusMode(mode) is RadiusMode.MAX else dist.mean())


def majority_label_and_purity(data: Dataset, members):
    """Most frequent label (ties go to the smallest id) and its share."""
    idx = _members(members)
    counts = np.bincount(data.labels[idx])
    label = int(np.argmax(counts))
    return label, float(counts[label] / idx.size)


@dataclass(frozen=True, eq=False)
class GranularBall:
    """One ball: members, mean center, radius, majority label, purity.

    ``division_point`` is the point used to assign members while splitting
    (the accelerated generators keep a parent's point as one child's point);
    it equals ``center`` for balls built directly from members.
    ``members`` is ``None`` for balls loaded from a model file exported
    without member indices; ``size`` is always set.
    """

    members: np.ndarray | None
    center: np.ndarray
    radius: float
    label: int
    purity: float
    division_point: np.ndarray
    size: int
    terminal: bool = False

    @property
    def d(self) -> int:
        return self.center.shape[0]


def make_ball(data: Dataset, members, mode=RadiusMode.MEAN, division_point=None,
              terminal=False) -> GranularBall:
    idx = np.sort(_members(members))
    x = data.features[idx]
    center = x.mean(axis=0)
    dist = np.sqrt(((x - center) ** 2).sum(axis=1))
    radius = float(dist.max() if RadiusMode(mode) is RadiusMode.MAX else dist.mean())
    counts = np.bincount(data.labels[idx])
    label = int(np.argmax(counts))
    dp = center.copy() if division_point is None else np.asarray(division_point, float).copy()
    return GranularBall(idx, center, radius, label, float(counts[label] / idx.size), dp, int(idx.size),
                        bool(terminal))


def heterogeneous_overlap(a: GranularBall, b: GranularBall) -> bool:
    """True iff the balls carry different labels and their spheres intersect."""
    if a.label == b.label:
        return False
    return bool(np.linalg.norm(a.center - b.center) <= a.radius + b.radius)


def overlapping_pairs(balls, among=None):
    """All heterogeneous overlapping pairs ``(i, j)``, ``i < j``, by vectorised scan.

    If ``among`` is given, only pairs with at least one index in it are returned.
    """
    m = len(balls)
    if m < 2:
        return []
    centers = np.array([b.center for b in balls])
    radii = np.array([b.radius for b in balls])
    labels = np.array([b.label for b in balls])
    rows = np.arange(m) if among is None else np.array(sorted(among), dtype=np.int64)
    if rows.size == 0:
        return []
    pairs = set()
    for start in range(0, rows.size, 512):
        r = rows[start:start + 512]
        dist = np.sqrt(((centers[r, None, :] - centers[None, :, :]) ** 2).sum(axis=2))
        hit = (dist <= radii[r, None] + radii[None, :]) & (labels[r, None] != labels[None, :])
        for a, b in zip(*np.nonzero(hit)):
            i, j = int(r[a]), int(b)
            pairs.add((min(i, j), max(i, j)))
    return sorted(pairs)


@dataclass
class BallModel:
    """A converged set of balls plus how it was produced."""

    balls: list
    radius_mode: RadiusMode
    method: str
    seed: int | None
    dataset_fingerprint: str
    iterations: int
    d: int
    class_names: tuple = ()
    counters: dict = field(default_factory=dict)
    normalization: dict | None = None

    def __post_init__(self):
        if not self.balls:
            raise ValueError("a ball model needs at least one ball")
        self.radius_mode = RadiusMode(self.radius_mode)

    @property
    def m(self) -> int:
        return len(self.balls)

    @property
    def centers(self) -> np.ndarray:
        return np.array([b.center for b in self.balls])

    @property
    def radii(self) -> np.ndarray:
        return np.array([b.radius for b in self.balls])

    @property
    def labels(self) -> np.ndarray:
        return np.array([b.label for b in self.balls], dtype=np.int64)

    def to_dict(self, members=True) -> dict:
        balls = []
        for b in self.balls:
            rec = {
                "center": [float(v) for v in b.center],
                "radius": float(b.radius),
                "label": int(b.label),
                "size": int(b.size),
                "purity": float(b.purity),
                "division_point": [float(v) for v in b.division_point],
                "terminal": bool(b.terminal),
            }
            if members and b.members is not None:
                rec["members"] = [int(i) for i in b.members]
            balls.append(rec)
        return {
            "version": MODEL_VERSION,
            "method": self.method,
            "radius_mode": self.radius_mode.value,
            "seed": self.seed,
            "d": self.d,
            "dataset_fingerprint": self.dataset_fingerprint,
            "class_names": list(self.class_names),
            "normalization": self.normalization,
            "provenance": {"iterations": self.iterations, **self.counters},
            "balls": balls,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "BallModel":
        if doc.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')!r}")
        d = int(doc["d"])
        balls = []
        for rec in doc["balls"]:
            center = np.asarray(rec["center"], dtype=float)
            if center.shape != (d,):
                raise ValueError(f"ball center has dimension {center.shape}, model d={d}")
            members = rec.get("members")
            balls.append(GranularBall(
                members=None if members is None else np.asarray(members, dtype=np.int64),
                center=center,
                radius=float(rec["radius"]),
                label=int(rec["label"]),
                purity=float(rec["purity"]),
                division_point=np.asarray(rec.get("division_point", rec["center"]), dtype=float),
                size=int(rec["size"]),
                terminal=bool(rec.get("terminal", False)),
            ))
        prov = dict(doc.get("provenance", {}))
        iterations = int(prov.pop("iterations", 0))
        return cls(balls, RadiusMode(doc["radius_mode"]), doc["method"], doc.get("seed"),
                   doc.get("dataset_fingerprint", ""), iterations, d,
                   tuple(doc.get("class_names", ())), prov, doc.get("normalization"))

    def to_json(self, members=True) -> str:
        return json.dumps(self.to_dict(members), indent=1, sort_keys=True) + "\n"

    def save(self, path, members=True) -> None:
        Path(path).write_text(self.to_json(members), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "BallModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class CoverageReport:
    coverage_degree: float
    ball_count: int
    objective: float
    lambda1: float
    lambda2: float


def coverage_objective(model: BallModel, n: int, lambda1=1.0, lambda2=1.0) -> CoverageReport:
    """Covering objective ``lambda1 * n / sum|GB_j| + lambda2 * m``.

    The generators are heuristics for this objective; it is reported, never
    optimised directly.
    """
    covered = sum(b.size for b in model.balls)
    if covered == 0:
        raise ValueError("model covers no samples")
    if lambda1 < 0 or lambda2 < 0:
        raise ValueError("weights must be non-negative")
    m = model.m
    return CoverageReport(covered / n, m, lambda1 * n / covered + lambda2 * m, lambda1, lambda2)
