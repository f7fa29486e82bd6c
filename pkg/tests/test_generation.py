import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import cdist

from granular_balls import Dataset, make_gaussian_mixture
from granular_balls.generation import (GenerationConfig, Method, SplitCollapse, SplitOutcome,
                                       de_overlap, divide_once, generate, global_division,
                                       is_splittable, kmeans_split, pick_heterogeneous_centers,
                                       residual_overlaps, weighted_purity_sum)
from granular_balls.granule import BallModel, make_ball, overlapping_pairs

METHODS = [(Method.ORIGINAL, 1.0), (Method.ACCELERATED, 1.0), (Method.ORIGINAL, 0.8),
           (Method.ACCELERATED, 0.8), (Method.ADAPTIVE, None)]


def ds(points, labels):
    return Dataset(np.asarray(points, dtype=float), np.asarray(labels))


def config(method, purity, seed=0, **kw):
    return GenerationConfig(method, purity, seed=seed, **kw)


def assert_partition(member_sets, n):
    allm = np.concatenate(member_sets)
    assert allm.size == n
    assert np.array_equal(np.sort(allm), np.arange(n))


class TestConfig:
    def test_threshold_rules(self):
        with pytest.raises(ValueError):
            GenerationConfig(Method.ADAPTIVE, 0.9)
        with pytest.raises(ValueError):
            GenerationConfig(Method.ACCELERATED, None)
        with pytest.raises(ValueError):
            GenerationConfig(Method.ORIGINAL, 1.5)
        with pytest.raises(ValueError):
            GenerationConfig(Method.ADAPTIVE, adaptive_rule="xor")

    def test_global_division_default(self):
        assert GenerationConfig(Method.ACCELERATED, 1.0).global_division
        assert GenerationConfig(Method.ADAPTIVE).global_division
        assert not GenerationConfig(Method.ORIGINAL, 1.0).global_division

    def test_aliases(self):
        assert Method.parse("accel") is Method.ACCELERATED
        assert Method.parse("origin") is Method.ORIGINAL
        with pytest.raises(ValueError):
            Method.parse("fast")


class TestHeterogeneousCenters:
    def test_retained_two_classes(self, rng):
        data = ds(rng.random((10, 2)), [0] * 5 + [1] * 5)
        picks = pick_heterogeneous_centers(data, np.arange(10), rng, retained_label=0)
        assert len(picks) == 1 and picks[0][0] == 1 and data.labels[picks[0][1]] == 1

    def test_retained_three_classes(self, rng):
        data = ds(rng.random((9, 2)), [0, 1, 2] * 3)
        picks = pick_heterogeneous_centers(data, np.arange(9), rng, retained_label=2)
        assert [c for c, _ in picks] == [0, 1]
        assert all(data.labels[i] == c for c, i in picks)

    def test_one_per_class_without_retained(self, rng):
        data = ds(rng.random((9, 2)), [0, 1, 2] * 3)
        picks = pick_heterogeneous_centers(data, np.arange(9), rng)
        assert [c for c, _ in picks] == [0, 1, 2]

    def test_deterministic(self):
        data = ds(np.random.default_rng(0).random((30, 2)), [0, 1, 2] * 10)
        a = pick_heterogeneous_centers(data, np.arange(30), np.random.default_rng(4))
        b = pick_heterogeneous_centers(data, np.arange(30), np.random.default_rng(4))
        assert a == b

    def test_single_class(self, rng):
        data = ds(rng.random((4, 2)), [1] * 4)
        with pytest.raises(ValueError):
            pick_heterogeneous_centers(data, np.arange(4), rng)


class TestDivideOnce:
    def test_nearest_center_partition(self):
        data = ds([[0, 0], [1, 0], [4, 0], [5, 0]], [0, 0, 1, 1])
        out = divide_once(data, np.arange(4), [[0, 0], [5, 0]])
        assert [c.tolist() for c in out.children] == [[0, 1], [2, 3]]

    def test_tie_goes_to_first_center(self):
        data = ds([[0, 0], [1, 0], [2, 0]], [0, 1, 1])
        out = divide_once(data, np.arange(3), [[0, 0], [2, 0]])
        assert out.children[0].tolist() == [0, 1]

    def test_collapse(self):
        data = ds([[0, 0], [0.1, 0]], [0, 1])
        with pytest.raises(SplitCollapse):
            divide_once(data, np.arange(2), [[0, 0], [9, 9]])

    def test_counts_only_uncached(self):
        data = ds(np.arange(10.0)[:, None], [0, 1] * 5)

        class S:
            distance_evals = 0

        s = S()
        divide_once(data, np.arange(10), [[0.0], [9.0], [4.0]],
                    cached_distances=np.arange(10.0), stats=s)
        assert s.distance_evals == 20

    @settings(max_examples=80, deadline=None)
    @given(st.integers(2, 40), st.integers(1, 3), st.integers(2, 4), st.integers(0, 2**31))
    def test_cached_equals_uncached(self, n, d, k, seed):
        r = np.random.default_rng(seed)
        # integer grid makes exact ties common
        data = ds(r.integers(0, 4, (n, d)), r.integers(0, 2, n))
        members = np.sort(r.choice(n, size=n, replace=False))
        centers = [data.features[i] for i in r.choice(n, size=min(k, n), replace=False)]
        assume(len(centers) >= 2)
        cached = np.linalg.norm(data.features[members] - centers[0], axis=1)
        try:
            plain = divide_once(data, members, centers)
        except SplitCollapse:
            with pytest.raises(SplitCollapse):
                divide_once(data, members, centers, cached)
            return
        fast = divide_once(data, members, centers, cached)
        assert [c.tolist() for c in plain.children] == [c.tolist() for c in fast.children]
        assert_partition(plain.children, n)


def lloyd_oracle(x, init, max_iters=100):
    """Textbook Lloyd iterations written with plain loops."""
    centers = [list(map(float, x[i])) for i in init]
    prev = None
    for _ in range(max_iters + 1):
        assign = []
        for p in x:
            d = [sum((a - b) ** 2 for a, b in zip(p, c)) for c in centers]
            assign.append(d.index(min(d)))
        if assign == prev:
            break
        for j in range(len(centers)):
            pts = [x[i] for i in range(len(x)) if assign[i] == j]
            if not pts:
                return None
            centers[j] = [sum(col) / len(pts) for col in zip(*pts)]
        prev = assign
    return assign


class TestKmeansSplit:
    def test_two_clusters(self, rng):
        x = np.array([[0, 0], [0.2, 0.1], [0.1, 0.3], [5, 5], [5.2, 5.1], [4.9, 5.3]])
        data = ds(x, [0, 0, 0, 1, 1, 1])
        out = kmeans_split(data, np.arange(6), 2, rng)
        assert sorted(c.tolist() for c in out.children) == [[0, 1, 2], [3, 4, 5]]

    def test_fixed_point(self):
        x = np.array([[0.0, 0], [10, 0]])
        data = ds(x, [0, 1])
        out = kmeans_split(data, np.arange(2), 2, None, initial_indices=[0, 1])
        assert out.iterations == 1
        assert [c.tolist() for c in out.children] == [[0], [1]]

    def test_two_points_singletons(self, rng):
        data = ds([[0, 0], [1, 1]], [0, 1])
        out = kmeans_split(data, np.arange(2), 2, rng)
        assert sorted(c.tolist() for c in out.children) == [[0], [1]]

    def test_empty_cluster_reseeded(self):
        # center 2 duplicates center 1 and starts empty
        data = ds([[0, 0], [1, 0], [1, 0], [5, 0]], [0, 1, 2, 1])
        out = kmeans_split(data, np.arange(4), 3, None, initial_indices=[0, 1, 2])
        assert len(out.children) == 3
        assert_partition(out.children, 4)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(2, 8), st.integers(1, 3), st.integers(2, 3), st.integers(0, 2**31))
    def test_matches_lloyd_oracle(self, n, d, k, seed):
        r = np.random.default_rng(seed)
        x = r.random((n, d))
        assume(k <= n)
        labels = np.concatenate([np.arange(k), r.integers(0, k, n - k)])
        data = ds(x, labels)
        init = [int(np.flatnonzero(labels == c)[0]) for c in range(k)]
        expected = lloyd_oracle(x, init)
        assume(expected is not None)
        out = kmeans_split(data, np.arange(n), k, None, initial_indices=init)
        got = np.empty(n, dtype=int)
        for cid, child in zip(out.center_ids, out.children):
            got[child] = cid
        assert got.tolist() == expected


def all_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in all_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def weighted_purity_case(labels, blocks):
    """Reference evaluation: (W, T, W == T expected)."""
    n = len(labels)
    parent_counts = np.bincount(labels)
    t_label = int(np.argmax(parent_counts))
    w = 0
    shared = True
    for b in blocks:
        counts = np.bincount(labels[b], minlength=t_label + 1)
        w += counts.max()
        shared &= counts[t_label] == counts.max()
    return w / n, parent_counts.max() / n, shared


class TestWeightedPurity:
    def test_hand_example(self):
        labels = np.array([1] * 6 + [0] * 4)
        data = ds(np.zeros((10, 1)), labels)
        out = SplitOutcome([np.arange(5), np.arange(5, 10)], [None, None])
        parent = make_ball(data, np.arange(10))
        assert parent.purity == 0.6
        assert weighted_purity_sum(data, parent, out) == pytest.approx(0.9, abs=1e-15)

    def test_all_children_share_label(self):
        labels = np.array([1, 1, 1, 0, 1, 1, 0, 1])
        data = ds(np.zeros((8, 1)), labels)
        out = SplitOutcome([np.arange(4), np.arange(4, 8)], [None, None])
        assert weighted_purity_sum(data, np.arange(8), out) == 6 / 8

    def test_exhaustive_two_way_six_points(self):
        labels = np.array([0, 0, 0, 1, 1, 2])
        data = ds(np.zeros((6, 1)), labels)
        for mask in range(1, 2 ** 5):
            a = [i for i in range(6) if mask >> i & 1]
            b = [i for i in range(6) if not mask >> i & 1]
            out = SplitOutcome([np.array(a), np.array(b)], [None, None])
            w = weighted_purity_sum(data, np.arange(6), out)
            _, t, shared = weighted_purity_case(labels, [a, b])
            assert w >= t
            assert (w == t) == shared
            child_labels = [make_ball(data, c).label for c in (a, b)]
            if all(lab == 0 for lab in child_labels):
                assert w == t

    @pytest.mark.parametrize("labels", [[0, 1], [0, 0, 1], [0, 1, 2, 0], [0, 0, 1, 1, 2],
                                        [2, 2, 1, 0, 1, 2, 0], [0, 1, 0, 1, 0, 1, 2, 2]])
    def test_exhaustive_partitions(self, labels):
        labels = np.array(labels)
        n = labels.size
        data = ds(np.zeros((n, 1)), labels)
        for blocks in all_partitions(list(range(n))):
            if len(blocks) < 2:
                continue
            out = SplitOutcome([np.array(b) for b in blocks], [None] * len(blocks))
            w = weighted_purity_sum(data, np.arange(n), out)
            w_ref, t, shared = weighted_purity_case(labels, blocks)
            assert w == pytest.approx(w_ref, abs=1e-15)
            assert w >= t - 1e-15
            assert (abs(w - t) < 1e-12) == shared


def run_all(data, **kw):
    for method, purity in METHODS:
        if method is Method.ADAPTIVE:
            yield method, purity, generate(data, config(method, purity, **kw))
        else:
            yield method, purity, generate(data, config(method, purity, **kw))


class TestGenerators:
    def test_partition_at_every_step(self, toy_datasets):
        for name, data in toy_datasets.items():
            for method, purity in METHODS:
                steps = []
                model = generate(data, config(method, purity, seed=3),
                                 trace=lambda stage, sets: steps.append(sets))
                assert steps, name
                for sets in steps:
                    assert_partition(sets, data.n)
                assert_partition([b.members for b in model.balls], data.n)

    def test_ball_count_nondecreasing_between_sweeps(self, toy_datasets):
        data = toy_datasets["mixture"]
        for method, purity in METHODS:
            counts = []
            generate(data, config(method, purity, seed=1),
                     trace=lambda stage, sets: counts.append((stage, len(sets))))
            sweeps = [c for s, c in counts if s in ("start", "sweep")]
            assert sweeps == sorted(sweeps), method

    def test_deterministic(self, toy_datasets):
        data = toy_datasets["three_class"]
        for method, purity in METHODS:
            a = generate(data, config(method, purity, seed=11))
            b = generate(data, config(method, purity, seed=11))
            assert a.to_json() == b.to_json()

    def test_seed_changes_result(self, toy_datasets):
        data = toy_datasets["mixture"]
        a = generate(data, config(Method.ACCELERATED, 1.0, seed=1))
        b = generate(data, config(Method.ACCELERATED, 1.0, seed=2))
        assert a.to_json() != b.to_json()

    def test_pure_dataset_single_ball(self, toy_datasets):
        data = toy_datasets["single_class"]
        for method, purity in METHODS:
            model = generate(data, config(method, purity))
            assert model.m == 1 and model.balls[0].purity == 1.0

    def test_threshold_just_above_majority_splits(self, toy_datasets):
        data = toy_datasets["mixture"]
        majority = np.bincount(data.labels).max() / data.n
        for method in (Method.ORIGINAL, Method.ACCELERATED):
            model = generate(data, config(method, majority + 1e-6))
            assert model.m >= 2

    def test_threshold_output_purity(self, toy_datasets):
        for data in toy_datasets.values():
            for method in (Method.ORIGINAL, Method.ACCELERATED):
                for purity in (1.0, 0.85):
                    model = generate(data, config(method, purity, seed=5, global_division=False))
                    for b in model.balls:
                        assert b.purity >= purity or not is_splittable(data, b)

    def test_weighted_purity_holds_in_live_runs(self, toy_datasets):
        for data in toy_datasets.values():
            for method, purity in METHODS:
                model = generate(data, config(method, purity, seed=2))
                assert model.counters["weighted_purity_violations"] == 0

    def test_duplicates_terminate(self, toy_datasets):
        data = toy_datasets["duplicates"]
        model = generate(data, config(Method.ACCELERATED, 1.0, global_division=False))
        impure = [b for b in model.balls if b.purity < 1.0]
        assert all(b.terminal for b in impure)
        assert model.counters["collapses"] > 0

    def test_counters_exported(self, toy_datasets):
        model = generate(toy_datasets["mixture"], config(Method.ACCELERATED, 1.0))
        doc = model.to_dict()
        for key in ("distance_evals", "splits", "iterations"):
            assert key in doc["provenance"]

    def test_accelerated_fewer_distances(self):
        data = make_gaussian_mixture(5000, 2, 6.0, seed=4)
        for seed in range(3):
            orig = generate(data, config(Method.ORIGINAL, 1.0, seed=seed))
            acc = generate(data, config(Method.ACCELERATED, 1.0, seed=seed))
            assert acc.counters["distance_evals"] < orig.counters["distance_evals"]
            assert 0.5 <= acc.m / orig.m <= 2.0

    def test_accelerated_distance_bound(self, toy_datasets):
        for data in toy_datasets.values():
            model = generate(data, config(Method.ACCELERATED, 1.0, seed=1))
            k = np.unique(data.labels).size
            sweeps = model.iterations
            bound = (k * sweeps - sweeps + model.counters["global_division_centers"] + 1) * data.n
            if model.counters["collapses"] == 0:
                assert model.counters["distance_evals"] <= bound

    def test_radius_modes(self, toy_datasets):
        data = toy_datasets["mixture"]
        a = generate(data, config(Method.ACCELERATED, 1.0, radius_mode="mean"))
        b = generate(data, config(Method.ACCELERATED, 1.0, radius_mode="max"))
        assert a.radius_mode.value == "mean" and b.radius_mode.value == "max"
        np.testing.assert_array_equal(a.centers, b.centers)
        assert np.all(a.radii <= b.radii + 1e-12)


class TestAdaptive:
    def test_floor_is_root_purity(self):
        data = ds(np.random.default_rng(0).random((40, 2)), [0, 1] * 20)
        model = generate(data, config(Method.ADAPTIVE, None))
        assert model.counters["purity_floor"] == 0.5

    def test_invariants(self, toy_datasets):
        for name, data in toy_datasets.items():
            for seed in range(3):
                model = generate(data, config(Method.ADAPTIVE, None, seed=seed))
                t0 = np.bincount(data.labels).max() / data.n
                for b in model.balls:
                    if is_splittable(data, b):
                        assert b.purity > t0, name
                for i, j in overlapping_pairs(model.balls):
                    assert not (is_splittable(data, model.balls[i])
                                and is_splittable(data, model.balls[j])), name
                assert model.counters["residual_overlaps"] == len(residual_overlaps(data, model.balls))

    def test_rejects_label_preserving_split(self):
        # two far-apart groups; each minority point shares its location with
        # two majority points, so any split of a group keeps the group label
        # in every child (W == T) and must be rejected once purity > 0.5
        def group(x0, major, minor):
            pts = [(x0, 0)] * 3 + [(x0, 1)] * 3 + [(x0 + 0.5, 0.5)] * 2
            labs = [major, major, minor, major, major, minor, major, major]
            return pts, labs

        pa, la = group(10.0, 0, 1)
        pb, lb = group(0.0, 1, 0)
        data = ds(pa + pb, la + lb)
        model = generate(data, config(Method.ADAPTIVE, None, global_division=False))
        assert model.counters["purity_floor"] == 0.5
        assert model.m == 2
        assert sorted(b.purity for b in model.balls) == [0.75, 0.75]
        # a group whose kept point is the far root mean collapses instead
        assert model.counters["rejected_splits"] >= 1
        assert model.counters["weighted_purity_equal"] >= 1
        assert all(b.terminal or b.purity == 0.75 for b in model.balls)
        assert model.counters["weighted_purity_violations"] == 0

    def test_and_rule(self, toy_datasets):
        data = toy_datasets["mixture"]
        model = generate(data, config(Method.ADAPTIVE, None, adaptive_rule="and"))
        assert model.m >= 2
        assert_partition([x.members for x in model.balls], data.n)


class TestGlobalDivision:
    def _model(self, data, groups, points=None):
        balls = [make_ball(data, g, "mean", None if points is None else points[i])
                 for i, g in enumerate(groups)]
        return BallModel(balls, "mean", "accelerated", 0, data.fingerprint(), 1, data.d)

    def test_fixed_point(self):
        x = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=float)
        data = ds(x, [0, 0, 1, 1])
        model = self._model(data, [np.array([0, 1]), np.array([2, 3])])
        out = global_division(data, model)
        assert [b.members.tolist() for b in out.balls] == [[0, 1], [2, 3]]
        np.testing.assert_array_equal(out.centers, model.centers)

    def test_empty_ball_dropped(self):
        x = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=float)
        data = ds(x, [0, 0, 1, 1])
        pts = [np.array([0, 0.5]), np.array([10, 0.5]), np.array([50.0, 50.0])]
        model = self._model(data, [np.array([0, 1]), np.array([2]), np.array([3])], pts)
        out = global_division(data, model)
        assert out.m == model.m - 1
        assert_partition([b.members for b in out.balls], 4)

    def test_division_point_moves_to_center(self, toy_datasets):
        data = toy_datasets["mixture"]
        model = generate(data, config(Method.ACCELERATED, 1.0))
        for b in model.balls:
            np.testing.assert_array_equal(b.division_point, b.center)

    def test_reassignment_does_not_loosen(self, toy_datasets):
        for data in toy_datasets.values():
            pre = generate(data, config(Method.ACCELERATED, 1.0, seed=4, global_division=False))
            post = global_division(data, pre)
            points = np.array([b.division_point for b in pre.balls])
            before = sum(np.linalg.norm(data.features[b.members] - b.division_point, axis=1).sum()
                         for b in pre.balls)
            after = cdist(data.features, points).min(axis=1).sum()
            assert after <= before + 1e-9
            assert_partition([b.members for b in post.balls], data.n)

    @settings(max_examples=120, deadline=None)
    @given(st.integers(3, 120), st.integers(1, 3), st.integers(2, 12), st.booleans(),
           st.integers(0, 2**31))
    def test_pruned_matches_full_scan(self, n, d, m, grid, seed):
        r = np.random.default_rng(seed)
        x = r.integers(0, 5, (n, d)).astype(float) if grid else r.random((n, d))
        data = ds(x, r.integers(0, 2, n))
        m = min(m, n)
        points = x[r.choice(n, m, replace=False)] + (0 if grid else r.normal(0, 0.1, (m, d)))
        # arbitrary (not nearest) initial membership exercises the pruning bound
        owner = r.integers(0, m, n)
        owner[:m] = np.arange(m)
        groups = [np.flatnonzero(owner == j) for j in range(m)]
        model = self._model(data, groups, list(points))
        out = global_division(data, model)
        full = cdist(x, points)
        assign = np.argmin(full, axis=1)
        expected = [np.flatnonzero(assign == j).tolist() for j in range(m) if (assign == j).any()]
        assert [b.members.tolist() for b in out.balls] == expected


class TestDeOverlap:
    def test_two_overlapping_balls_split(self):
        rng = np.random.default_rng(1)
        a = rng.normal((0, 0), 0.5, (30, 2))
        b = rng.normal((0.8, 0), 0.5, (30, 2))
        x = np.vstack([a, b])
        labels = np.array([0] * 27 + [1] * 3 + [1] * 27 + [0] * 3)
        data = ds(x, labels)
        balls = [make_ball(data, np.arange(30)), make_ball(data, np.arange(30, 60))]
        out, frontier, residual = de_overlap(data, balls, {0, 1})
        assert len(out) > 2 and frontier
        assert_partition([b.members for b in out], 60)
        # repeat until resolved
        for _ in range(50):
            if not frontier:
                break
            out, frontier, residual = de_overlap(data, out, frontier)
        for i, j in overlapping_pairs(out):
            assert not (is_splittable(data, out[i]) and is_splittable(data, out[j]))

    def test_no_overlap_unchanged(self):
        x = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=float)
        data = ds(x, [0, 0, 1, 1])
        balls = [make_ball(data, np.array([0, 1])), make_ball(data, np.array([2, 3]))]
        out, frontier, residual = de_overlap(data, balls, {0, 1})
        assert [b.members.tolist() for b in out] == [[0, 1], [2, 3]]
        assert frontier == set() and residual == []

    def test_singletons_are_residual(self):
        # coincident points with different labels: radius 0 balls still touch
        data = ds([[0, 0], [0, 0], [3, 3]], [0, 1, 1])
        balls = [make_ball(data, [0]), make_ball(data, [1]), make_ball(data, [2])]
        out, frontier, residual = de_overlap(data, balls, {0, 1, 2})
        assert frontier == set() and residual == [(0, 1)]
        assert len(out) == 3
