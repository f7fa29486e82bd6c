"""Granular-ball generators.

Three strategies share one bookkeeping loop over "sweeps": every sweep visits
the current balls in order and replaces each ball that must split by its
children.

* ``original``: split with a full k-means (Lloyd) run seeded by one random
  point per class, until every ball reaches the purity threshold.
* ``accelerated``: split with a single nearest-center division; the parent's
  division point is kept as one child's point, so only the k-1 new
  heterogeneous centers need distance evaluations. Ends with one global
  division over all division points.
* ``adaptive``: the accelerated split, accepted when the weighted purity sum
  of the children beats the parent purity or the parent is no purer than the
  whole dataset; overlapping heterogeneous balls are split further. No
  threshold parameter.

Every ball draws its random numbers from a generator seeded by
``(seed, ball id, attempt)``, so results do not depend on visiting order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import Dataset
from .granule import BallModel, GranularBall, RadiusMode, make_ball, overlapping_pairs

__all__ = [
    "Method",
    "GenerationConfig",
    "SplitOutcome",
    "SplitCollapse",
    "pick_heterogeneous_centers",
    "divide_once",
    "kmeans_split",
    "weighted_purity_sum",
    "generate",
    "generate_original",
    "generate_accelerated",
    "generate_adaptive",
    "de_overlap",
    "global_division",
    "is_splittable",
    "residual_overlaps",
]


class Method(str, enum.Enum):
    ORIGINAL = "original"
    ACCELERATED = "accelerated"
    ADAPTIVE = "adaptive"

    @classmethod
    def parse(cls, value) -> "Method":
        aliases = {"origin": "original", "accel": "accelerated", "acc": "accelerated",
                   "adp": "adaptive"}
        if isinstance(value, cls):
            return value
        return cls(aliases.get(str(value).lower(), str(value).lower()))


@dataclass(frozen=True)
class GenerationConfig:
    """Settings for one generator run.

    ``purity_threshold`` must be given for the threshold-driven methods and
    must be left out for ``adaptive``. ``global_division`` defaults to on for
    accelerated/adaptive and off for original.
    ``adaptive_rule`` picks how the adaptive split test combines its two
    conditions: ``"or"`` (default) or ``"and"``.
    """

    method: Method = Method.ACCELERATED
    purity_threshold: float | None = None
    radius_mode: RadiusMode = RadiusMode.MEAN
    seed: int | None = 0
    max_kmeans_iters: int = 100
    global_division: bool | None = None
    adaptive_rule: str = "or"
    max_redraws: int = 10

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        object.__setattr__(self, "radius_mode", RadiusMode(self.radius_mode))
        if self.method is Method.ADAPTIVE:
            if self.purity_threshold is not None:
                raise ValueError("the adaptive method takes no purity threshold")
        else:
            if self.purity_threshold is None:
                raise ValueError(f"method {self.method.value} needs a purity threshold")
            if not 0 < self.purity_threshold <= 1:
                raise ValueError(f"purity threshold must be in (0, 1], got {self.purity_threshold}")
        if self.adaptive_rule not in ("or", "and"):
            raise ValueError(f"adaptive_rule must be 'or' or 'and', got {self.adaptive_rule!r}")
        if self.max_kmeans_iters < 1 or self.max_redraws < 1:
            raise ValueError("max_kmeans_iters and max_redraws must be positive")
        if self.global_division is None:
            object.__setattr__(self, "global_division", self.method is not Method.ORIGINAL)


class SplitCollapse(RuntimeError):
    """All members of a ball fell onto a single center."""


@dataclass
class SplitOutcome:
    children: list
    child_division_points: list
    child_distances: list = field(default_factory=list)
    center_ids: list = field(default_factory=list)
    iterations: int = 1

    def __post_init__(self):
        if len(self.children) < 2:
            raise SplitCollapse("a split needs at least two nonempty children")


class _Stats:
    """Instrumentation counters exported in the model provenance."""

    def __init__(self):
        self.distance_evals = 0
        self.splits = 0
        self.collapses = 0
        self.rejected_splits = 0
        self.kmeans_iterations = 0
        self.overlap_rounds = 0
        self.forced_splits = 0
        self.repair_splits = 0
        self.global_division_centers = 0
        self.weighted_purity_equal = 0
        self.weighted_purity_violations = 0

    def as_dict(self):
        return dict(vars(self))


def _distances(x, point):
    return np.sqrt(((x - point) ** 2).sum(axis=1))


def pick_heterogeneous_centers(data: Dataset, members, rng, retained_label=None):
    """One random member per class present in ``members``.

    With ``retained_label`` the class of the kept division point is skipped,
    giving the k-1 new centers of an accelerated split.

    Returns:
        list of (class id, sample index), ordered by class id.
    """
    members = np.asarray(members, dtype=np.int64)
    labels = data.labels[members]
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("heterogeneous centers need a ball with at least two classes")
    picks = []
    for c in classes:
        if retained_label is not None and c == retained_label:
            continue
        pool = members[labels == c]
        picks.append((int(c), int(pool[rng.integers(pool.size)])))
    return picks


def divide_once(data: Dataset, parent_members, centers, cached_distances=None, stats=None):
    """Assign every member to its nearest center (ties to the lowest index).

    ``cached_distances`` holds the members' distances to ``centers[0]`` and
    spares their recomputation. Empty children are dropped.

    Raises:
        SplitCollapse: fewer than two children are nonempty.
    """
    members = np.asarray(parent_members, dtype=np.int64)
    centers = [np.asarray(c, dtype=float) for c in centers]
    if len(centers) < 2:
        raise ValueError("divide_once needs at least two centers")
    x = data.features[members]
    dist = np.empty((members.size, len(centers)))
    first = 0
    if cached_distances is not None:
        cached = np.asarray(cached_distances, dtype=float)
        if cached.shape != (members.size,):
            raise ValueError("cached_distances must have one entry per member")
        dist[:, 0] = cached
        first = 1
    for j in range(first, len(centers)):
        dist[:, j] = _distances(x, centers[j])
    if stats is not None:
        stats.distance_evals += members.size * (len(centers) - first)
    assign = np.argmin(dist, axis=1)
    children, points, cached_out, ids = [], [], [], []
    for j in range(len(centers)):
        mask = assign == j
        if mask.any():
            children.append(members[mask])
            points.append(centers[j])
            cached_out.append(dist[mask, j])
            ids.append(j)
    return SplitOutcome(children, points, cached_out, ids)


def kmeans_split(data: Dataset, parent_members, k, rng, max_iters=100, stats=None,
                 initial_indices=None):
    """Lloyd's k-means on the members, seeded with heterogeneous points.

    Iterates until the assignment stops changing or ``max_iters`` center
    updates were made. An empty cluster is re-seeded with the point farthest
    from its current center. ``SplitOutcome.iterations`` is the number of
    center updates.
    """
    members = np.asarray(parent_members, dtype=np.int64)
    if members.size < k:
        raise ValueError(f"cannot split {members.size} members into {k} clusters")
    if initial_indices is None:
        initial_indices = [i for _, i in pick_heterogeneous_centers(data, members, rng)]
        if len(initial_indices) != k:
            raise ValueError(f"k={k} does not match the {len(initial_indices)} classes present")
    x = data.features[members]
    centers = data.features[np.asarray(initial_indices)].astype(float)
    prev = None
    updates = 0
    while True:
        dist = np.sqrt(((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2))
        if stats is not None:
            stats.distance_evals += members.size * k
        assign = np.argmin(dist, axis=1)
        counts = np.bincount(assign, minlength=k)
        for j in np.flatnonzero(counts == 0):
            own = dist[np.arange(members.size), assign]
            movable = counts[assign] > 1
            if not movable.any():
                break
            p = int(np.argmax(np.where(movable, own, -1.0)))
            counts[assign[p]] -= 1
            assign[p] = j
            counts[j] += 1
            dist[p, j] = 0.0
        if prev is not None and np.array_equal(assign, prev):
            break
        if updates >= max_iters:
            break
        for j in range(k):
            sel = assign == j
            if sel.any():
                centers[j] = x[sel].mean(axis=0)
        updates += 1
        prev = assign
    if stats is not None:
        stats.kmeans_iterations += updates
    children, points, ids = [], [], []
    for j in range(k):
        sel = assign == j
        if sel.any():
            children.append(members[sel])
            points.append(x[sel].mean(axis=0))
            ids.append(j)
    return SplitOutcome(children, points, [], ids, iterations=updates)


def weighted_purity_sum(data: Dataset, parent, outcome) -> float:
    """Sum over children of majority-class count, divided by the parent size.

    ``parent`` may be a GranularBall or a member index array.
    """
    members = parent.members if isinstance(parent, GranularBall) else np.asarray(parent)
    total = sum(int(np.bincount(data.labels[c]).max()) for c in outcome.children)
    return total / len(members)


def _check_weighted_purity(data, parent_labels_counts, outcome, stats):
    # W >= T always; W == T exactly when the parent's majority label also
    # attains the majority count in every child.
    label = int(np.argmax(parent_labels_counts))
    t_count = int(parent_labels_counts[label])
    w_count = 0
    shared = True
    for child in outcome.children:
        counts = np.bincount(data.labels[child], minlength=label + 1)
        w_count += int(counts.max())
        shared &= bool(counts[label] == counts.max())
    if w_count == t_count:
        stats.weighted_purity_equal += 1
    if w_count < t_count or (w_count == t_count) != shared:
        stats.weighted_purity_violations += 1
    return w_count


class _Node:
    """Mutable ball used while generating; finalised into a GranularBall."""

    __slots__ = ("id", "members", "point", "point_label", "dist", "label", "purity",
                 "n_classes", "counts", "terminal", "_geom")

    def __init__(self, node_id, data, members, point, point_label, dist):
        self.id = node_id
        self.members = members
        self.point = point
        self.point_label = point_label
        self.dist = dist
        counts = np.bincount(data.labels[members])
        self.counts = counts
        self.label = int(np.argmax(counts))
        self.purity = counts[self.label] / members.size
        self.n_classes = int(np.count_nonzero(counts))
        self.terminal = False
        self._geom = None

    @property
    def splittable(self):
        return not self.terminal and self.members.size >= 2 and self.n_classes >= 2

    def geometry(self, data, mode):
        if self._geom is None:
            x = data.features[self.members]
            c = x.mean(axis=0)
            r = _distances(x, c)
            self._geom = (c, float(r.max() if mode is RadiusMode.MAX else r.mean()))
        return self._geom


class _Run:
    """State shared by one generator invocation."""

    def __init__(self, data, config, trace=None):
        self.data = data
        self.config = config
        seed = config.seed
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (2 ** 63))
        self.seed = seed
        self.stats = _Stats()
        self.trace = trace
        self._next_id = 0

    def rng(self, *key):
        return np.random.default_rng([self.seed, *key])

    def node(self, members, point, point_label, dist):
        n = _Node(self._next_id, self.data, members, point, point_label, dist)
        self._next_id += 1
        return n

    def root(self, cache_distances):
        members = np.arange(self.data.n, dtype=np.int64)
        point = self.data.features.mean(axis=0)
        dist = None
        if cache_distances:
            dist = _distances(self.data.features, point)
            self.stats.distance_evals += self.data.n
        counts = np.bincount(self.data.labels)
        return self.node(members, point, int(np.argmax(counts)), dist)

    def emit(self, stage, nodes):
        if self.trace is not None:
            self.trace(stage, [n.members for n in nodes])

    def accelerated_split(self, node, kind=0, attempt=0):
        """One division around the kept point plus k-1 heterogeneous centers.

        Returns the child nodes, or None after ``max_redraws`` collapses.
        """
        data = self.data
        for redraw in range(self.config.max_redraws):
            rng = self.rng(node.id, kind, attempt, redraw)
            picks = pick_heterogeneous_centers(data, node.members, rng, node.point_label)
            centers = [node.point] + [data.features[i] for _, i in picks]
            try:
                out = divide_once(data, node.members, centers, node.dist, self.stats)
            except SplitCollapse:
                self.stats.collapses += 1
                continue
            labels = [node.point_label] + [c for c, _ in picks]
            children = [
                self.node(m, p, labels[j], dc)
                for m, p, dc, j in zip(out.children, out.child_division_points,
                                       out.child_distances, out.center_ids)
            ]
            return out, children
        node.terminal = True
        return None, None

    def kmeans_children(self, node, attempt=0):
        data = self.data
        for redraw in range(self.config.max_redraws):
            rng = self.rng(node.id, 0, attempt, redraw)
            try:
                out = kmeans_split(data, node.members, node.n_classes, rng,
                                   self.config.max_kmeans_iters, self.stats)
            except SplitCollapse:
                self.stats.collapses += 1
                continue
            children = [self.node(m, p, -1, None)
                        for m, p in zip(out.children, out.child_division_points)]
            return out, children
        node.terminal = True
        return None, None

    def finish(self, nodes, sweeps):
        cfg = self.config
        # members must stay aligned with the cached distances
        balls = [make_ball(self.data, n.members, cfg.radius_mode, n.point, n.terminal)
                 for n in nodes]
        model = self._model(balls, sweeps)
        if cfg.global_division:
            cached = None
            if all(n.dist is not None for n in nodes):
                cached = [n.dist[np.argsort(n.members, kind="stable")] for n in nodes]
            model = global_division(self.data, model, self.stats, cached)
        return model

    def _model(self, balls, sweeps):
        cfg = self.config
        return BallModel(
            balls=balls,
            radius_mode=cfg.radius_mode,
            method=cfg.method.value,
            seed=self.seed,
            dataset_fingerprint=self.data.fingerprint(),
            iterations=sweeps,
            d=self.data.d,
            class_names=self.data.class_names,
            counters=self.stats.as_dict(),
        )


def is_splittable(data: Dataset, ball: GranularBall) -> bool:
    """A ball can split if it has two members of different classes and was not
    marked terminal after repeated division collapses."""
    if ball.terminal or ball.members is None or ball.members.size < 2:
        return False
    return np.unique(data.labels[ball.members]).size >= 2


def _candidate_points(points, reach, stats):
    """For each division point j, the points q with |q - p_j| <= reach[j] (j included).

    Only the upper triangle of the pairwise distance matrix is evaluated.
    """
    m = points.shape[0]
    owners, cands = [np.arange(m)], [np.arange(m)]
    step = max(1, 1_000_000 // m)
    for a in range(0, m, step):
        b = min(m, a + step)
        block = np.sqrt(((points[a:b, None, :] - points[None, a:, :]) ** 2).sum(axis=2))
        if stats is not None:
            stats.distance_evals += (b - a) * (m - a)
        upper = np.arange(a, m)[None, :] > np.arange(a, b)[:, None]
        i, j = np.nonzero(upper & (block <= reach[a:b, None]))
        owners.append(i + a)
        cands.append(j + a)
        i, j = np.nonzero(upper & (block <= reach[None, a:]))
        owners.append(j + a)
        cands.append(i + a)
    owners = np.concatenate(owners)
    cands = np.concatenate(cands)
    order = np.lexsort((cands, owners))
    owners, cands = owners[order], cands[order]
    bounds = np.searchsorted(owners, np.arange(m + 1))
    return [cands[bounds[j]:bounds[j + 1]] for j in range(m)]


def _nearest_points(data, points, member_sets, own_dist, stats):
    """Nearest division point for every sample, exactly as a full scan would pick it.

    A member at distance d0 from its own ball's point p can only be at least as
    close to another point q when |q - p| <= 2 * d0, so each candidate q is
    compared against just the members with d0 >= |q - p| / 2.
    """
    x = data.features
    reach = np.array([2.0 * float(dist.max()) for dist in own_dist])
    candidates = _candidate_points(points, reach, stats)
    assign = np.empty(data.n, dtype=np.int64)
    for j, (members, dist0) in enumerate(zip(member_sets, own_dist)):
        assign[members] = j
        cand = candidates[j]
        if cand.size == 1:
            continue
        order = np.argsort(-dist0, kind="stable")
        ms, d0 = members[order], dist0[order]
        others = cand[cand != j]
        gap = np.sqrt(((points[others] - points[j]) ** 2).sum(axis=1))
        # members sorted by decreasing d0: the ones that may switch form a prefix
        tops = np.searchsorted(-d0, -gap / 2.0, side="right")
        keep = tops > 0
        if not keep.any():
            continue
        others, tops = others[keep], tops[keep]
        by_top = np.argsort(-tops, kind="stable")
        others, tops = others[by_top], tops[by_top]
        best, best_d = np.full(ms.size, j), d0.copy()
        start = 0
        while start < others.size:
            # one block per band of candidates whose prefixes are within 2x
            rows = int(tops[start])
            stop = int(np.searchsorted(-tops, -(rows // 2), side="right"))
            stop = max(stop, start + 1)
            band = others[start:stop]
            dq = cdist(x[ms[:rows]], points[band])
            if stats is not None:
                stats.distance_evals += dq.size
            dq[np.arange(rows)[:, None] >= tops[None, start:stop]] = np.inf
            k = np.argmin(dq, axis=1)
            cand_d = dq[np.arange(rows), k]
            cand_q = band[k]
            # equal distances inside a band: argmin kept the first column, so
            # re-resolve exact ties toward the lowest point index
            tie = dq == cand_d[:, None]
            if tie.sum() > rows:
                cand_q = np.where(tie, band[None, :], np.iinfo(np.int64).max).min(axis=1)
            better = (cand_d < best_d[:rows]) | ((cand_d == best_d[:rows]) & (cand_q < best[:rows]))
            best[:rows] = np.where(better, cand_q, best[:rows])
            best_d[:rows] = np.where(better, cand_d, best_d[:rows])
            start = stop
        assign[ms] = best
    return assign


def global_division(data: Dataset, model: BallModel, stats=None, own_distances=None) -> BallModel:
    """Reassign every point to its nearest division point, once.

    Balls left empty are dropped; centers, radii, labels and purities are
    recomputed and each division point moves to its ball's new center.
    ``own_distances`` optionally supplies each member's known distance to its
    ball's division point (one array per ball, aligned with ``members``).
    """
    points = np.array([b.division_point for b in model.balls])
    x = data.features
    member_sets = [b.members for b in model.balls]
    covered = all(ms is not None for ms in member_sets) and \
        sum(ms.size for ms in member_sets) == data.n
    if covered:
        if own_distances is None:
            own_distances = [_distances(x[ms], p) for ms, p in zip(member_sets, points)]
            if stats is not None:
                stats.distance_evals += data.n
        assign = _nearest_points(data, points, member_sets, own_distances, stats)
    else:
        assign = np.empty(data.n, dtype=np.int64)
        step = max(1, 2_000_000 // points.size)
        for start in range(0, data.n, step):
            d2 = ((x[start:start + step, None, :] - points[None, :, :]) ** 2).sum(axis=2)
            assign[start:start + step] = np.argmin(d2, axis=1)
        if stats is not None:
            stats.distance_evals += data.n * points.shape[0]
    if stats is not None:
        stats.global_division_centers += points.shape[0]
    order = np.argsort(assign, kind="stable")
    bounds = np.searchsorted(assign[order], np.arange(points.shape[0] + 1))
    balls = [
        make_ball(data, order[bounds[j]:bounds[j + 1]], model.radius_mode)
        for j in range(points.shape[0]) if bounds[j + 1] > bounds[j]
    ]
    counters = dict(model.counters)
    if stats is not None:
        counters.update(stats.as_dict())
    return BallModel(balls, model.radius_mode, model.method, model.seed,
                     model.dataset_fingerprint, model.iterations, model.d,
                     model.class_names, counters, model.normalization)


def _threshold_loop(run: _Run, nodes, split):
    threshold = run.config.purity_threshold
    sweeps = 0
    limit = run.data.n + 1
    run.emit("start", nodes)
    while sweeps < limit:
        sweeps += 1
        out = []
        for node in nodes:
            if node.splittable and node.purity < threshold:
                outcome, children = split(node)
                if children is not None:
                    run.stats.splits += 1
                    _check_weighted_purity(run.data, node.counts, outcome, run.stats)
                    out.extend(children)
                    continue
            out.append(node)
        grew = len(out) > len(nodes)
        nodes = out
        run.emit("sweep", nodes)
        if not grew:
            break
    return nodes, sweeps


def generate_original(data: Dataset, config: GenerationConfig, trace=None) -> BallModel:
    """k-means driven generation: split impure balls into one cluster per class."""
    if config.method is not Method.ORIGINAL:
        raise ValueError("generate_original needs method=original")
    run = _Run(data, config, trace)
    root = run.root(cache_distances=False)
    nodes, sweeps = _threshold_loop(run, [root], run.kmeans_children)
    return run.finish(nodes, sweeps)


def generate_accelerated(data: Dataset, config: GenerationConfig, trace=None) -> BallModel:
    """Single-division generation with cached distances and a final global division."""
    if config.method is not Method.ACCELERATED:
        raise ValueError("generate_accelerated needs method=accelerated")
    run = _Run(data, config, trace)
    root = run.root(cache_distances=True)
    nodes, sweeps = _threshold_loop(run, [root], run.accelerated_split)
    return run.finish(nodes, sweeps)


def _deoverlap_nodes(run: _Run, nodes, frontier_ids, round_no):
    """One de-overlap round over node objects; returns (nodes, new frontier ids)."""
    data, mode = run.data, run.config.radius_mode
    views = []
    for n in nodes:
        c, r = n.geometry(data, mode)
        views.append(_View(c, r, n.label))
    among = [i for i, n in enumerate(nodes) if n.id in frontier_ids]
    pairs = overlapping_pairs(views, among)
    targets = {p for pair in pairs for p in pair if nodes[p].splittable}
    if not targets:
        return nodes, set()
    run.stats.overlap_rounds += 1
    out, frontier = [], set()
    for pos, node in enumerate(nodes):
        if pos in targets:
            _, children = run.accelerated_split(node, 2, round_no)
            if children is not None:
                run.stats.forced_splits += 1
                out.extend(children)
                frontier.update(c.id for c in children)
                continue
        out.append(node)
    return out, frontier


@dataclass
class _View:
    center: np.ndarray
    radius: float
    label: int


def _adaptive_loop(run: _Run, nodes, t0, initial_frontier, repair=False):
    rule = run.config.adaptive_rule
    sweeps = 0
    limit = run.data.n + 1
    frontier = set(initial_frontier)
    round_no = 0
    while frontier:
        nodes, frontier = _deoverlap_nodes(run, nodes, frontier, round_no)
        round_no += 1
    while sweeps < limit:
        sweeps += 1
        before = len(nodes)
        out, created = [], set()
        for node in nodes:
            if node.splittable:
                outcome, children = run.accelerated_split(node, 1 + repair, sweeps)
                if children is not None:
                    w_count = _check_weighted_purity(run.data, node.counts, outcome, run.stats)
                    w = w_count / node.members.size
                    improves, below = w > node.purity, node.purity <= t0
                    accept = (improves or below) if rule == "or" else (improves and below)
                    if accept:
                        run.stats.splits += 1
                        if repair:
                            run.stats.repair_splits += 1
                        out.extend(children)
                        created.update(c.id for c in children)
                        continue
                    run.stats.rejected_splits += 1
            out.append(node)
        nodes = out
        frontier = created
        while frontier:
            nodes, frontier = _deoverlap_nodes(run, nodes, frontier, round_no)
            round_no += 1
        run.emit("sweep", nodes)
        if len(nodes) <= before:
            break
    return nodes, sweeps


def generate_adaptive(data: Dataset, config: GenerationConfig, trace=None) -> BallModel:
    """Threshold-free generation driven by weighted purity, overlap and a purity floor.

    The purity floor is the purity of the whole dataset seen as one ball.
    After the global division, the split/de-overlap loop is run once more on
    the reassigned balls (without a second global division) so that the
    returned model itself satisfies the floor and has no overlapping pair of
    splittable heterogeneous balls.
    """
    if config.method is not Method.ADAPTIVE:
        raise ValueError("generate_adaptive needs method=adaptive")
    run = _Run(data, config, trace)
    root = run.root(cache_distances=True)
    t0 = root.purity
    run.emit("start", [root])
    nodes, sweeps = _adaptive_loop(run, [root], t0, initial_frontier=())
    model = run.finish(nodes, sweeps)
    if not config.global_division:
        return _with_floor(data, model, t0)
    # rebuild nodes around the new centers and restore the loop invariants
    nodes = []
    for b in model.balls:
        dist = _distances(data.features[b.members], b.division_point)
        run.stats.distance_evals += b.size
        nodes.append(run.node(b.members, b.division_point, b.label, dist))
    run.emit("global_division", nodes)
    nodes, extra = _adaptive_loop(run, nodes, t0, initial_frontier={n.id for n in nodes},
                                  repair=True)
    balls = [make_ball(data, n.members, config.radius_mode, n.point, n.terminal) for n in nodes]
    return _with_floor(data, run._model(balls, sweeps + extra), t0)


def _with_floor(data, model, t0):
    model.counters["purity_floor"] = float(t0)
    model.counters["residual_overlaps"] = len(residual_overlaps(data, model.balls))
    return model


def residual_overlaps(data: Dataset, balls):
    """Overlapping heterogeneous pairs in which neither ball can split."""
    return [(i, j) for i, j in overlapping_pairs(balls)
            if not (is_splittable(data, balls[i]) or is_splittable(data, balls[j]))]


def de_overlap(data: Dataset, balls, frontier, radius_mode=RadiusMode.MEAN, seed=0,
               round_no=0):
    """Force-split the splittable members of overlapping heterogeneous pairs.

    Only pairs with at least one ball index in ``frontier`` are examined.
    Each targeted ball gets one division around its division point (children
    accepted unconditionally).

    Returns:
        (list of GranularBall, set of new frontier indices, list of residual
        overlapping pairs in which neither ball can split).
    """
    cfg = GenerationConfig(Method.ADAPTIVE, radius_mode=radius_mode, seed=seed)
    run = _Run(data, cfg)
    nodes = []
    for b in balls:
        dist = _distances(data.features[b.members], b.division_point)
        n = run.node(b.members, b.division_point, b.label, dist)
        n.terminal = b.terminal
        nodes.append(n)
    ids = {nodes[i].id for i in frontier}
    new_nodes, new_ids = _deoverlap_nodes(run, nodes, ids, round_no)
    out = [make_ball(data, n.members, radius_mode, n.point, n.terminal) for n in new_nodes]
    new_frontier = {i for i, n in enumerate(new_nodes) if n.id in new_ids}
    return out, new_frontier, residual_overlaps(data, out)


_GENERATORS = {
    Method.ORIGINAL: generate_original,
    Method.ACCELERATED: generate_accelerated,
    Method.ADAPTIVE: generate_adaptive,
}


def generate(data: Dataset, config: GenerationConfig, trace=None) -> BallModel:
    """Dispatch to the generator named by ``config.method``."""
    return _GENERATORS[config.method](data, config, trace)
