import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterzsl.clustering import (
    KMeansConfig,
    assign_points,
    euclidean_distance,
    kmeans_fit,
    kmeanspp_init,
    sq_distances,
    update_centroids,
)
from clusterzsl.errors import DimMismatch, EmptyInput, InvalidSpec, KTooLarge
from oracles import brute_force_min_sse, naive_distance, well_separated_instance


class TestDistance:
    @pytest.mark.parametrize(
        "a, b, expected",
        [((0, 0), (3, 4), 5.0), ((1.5, -2.0), (1.5, -2.0), 0.0), ((1, 1, 1), (2, 2, 2), math.sqrt(3))],
    )
    def test_examples(self, a, b, expected):
        assert euclidean_distance(a, b) == pytest.approx(expected, rel=1e-15)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            euclidean_distance([0, 0], [0, 0, 0])

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 12).flatmap(
        lambda d: st.tuples(*[st.lists(st.floats(-1e6, 1e6), min_size=d, max_size=d)] * 2)))
    def test_bitwise_equal_to_naive_scan(self, pair):
        a, b = pair
        assert euclidean_distance(a, b) == naive_distance(a, b)
        assert math.sqrt(sq_distances([a], [b])[0, 0]) == naive_distance(a, b)


class TestInit:
    def test_k_equals_n_returns_all_points(self):
        pts = np.array([[0.0, 0.0], [1.0, 5.0], [-3.0, 2.0], [7.0, 7.0]])
        init = kmeanspp_init(pts, 4, seed=9)
        assert sorted(map(tuple, init)) == sorted(map(tuple, pts))

    def test_k_one_is_an_input_point(self):
        pts = np.random.default_rng(0).normal(size=(20, 3))
        init = kmeanspp_init(pts, 1, seed=5)
        assert any(np.array_equal(init[0], p) for p in pts)

    def test_deterministic(self):
        pts = np.random.default_rng(1).normal(size=(50, 2))
        np.testing.assert_array_equal(kmeanspp_init(pts, 7, 3), kmeanspp_init(pts, 7, 3))

    def test_plain_sampling_mode(self):
        pts = np.random.default_rng(1).normal(size=(30, 2))
        init = kmeanspp_init(pts, 30, 2, n_local_trials=1)
        assert len({tuple(p) for p in init}) == 30

    def test_degenerate_duplicates(self):
        pts = np.array([[1.0, 1.0]] * 3 + [[2.0, 2.0]] * 2)
        init = kmeanspp_init(pts, 4, seed=0)
        assert {tuple(p) for p in init} == {(1.0, 1.0), (2.0, 2.0)}

    def test_k_too_large(self):
        with pytest.raises(KTooLarge):
            kmeanspp_init(np.zeros((2, 2)), 3, 0)


class TestAssign:
    def test_nearest(self):
        assert assign_points([[0, 0], [10, 0]], [[0, 1], [10, 1]]).tolist() == [0, 1]

    def test_tie_goes_to_lowest_index(self):
        assert assign_points([[0.0, 0.0]], [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]).tolist() == [0]
        assert assign_points([[5.0]], [[9.0], [1.0]]).tolist() == [0]

    def test_single_centroid(self):
        assert assign_points(np.random.default_rng(0).normal(size=(6, 2)), [[0, 0]]).tolist() == [0] * 6

    def test_errors(self):
        with pytest.raises(DimMismatch):
            assign_points([[0, 0]], [[0, 0, 0]])
        with pytest.raises(EmptyInput):
            assign_points([[0, 0]], np.zeros((0, 2)))


class TestUpdate:
    def test_mean(self):
        c, labels = update_centroids([[0, 0], [0, 2]], [0, 0], 1)
        np.testing.assert_array_equal(c, [[0, 1]])

    def test_singletons(self):
        pts = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        c, _ = update_centroids(pts, [0, 1, 2], 3)
        np.testing.assert_array_equal(c, pts)

    def test_empty_cluster_takes_farthest_point(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [9.0, 0.0]])
        c, labels = update_centroids(pts, [0, 0, 0, 0], 2)
        assert labels.tolist() == [0, 0, 0, 1]
        np.testing.assert_array_equal(c, [[1.0, 0.0], [9.0, 0.0]])

    def test_repair_never_empties_a_donor(self):
        pts = np.array([[0.0], [0.0], [0.0]])
        c, labels = update_centroids(pts, [0, 0, 0], 3)
        assert sorted(labels.tolist()) == [0, 1, 2]

    def test_bad_assignment(self):
        with pytest.raises(InvalidSpec):
            update_centroids([[0.0]], [2], 2)


class TestFit:
    def test_square(self, square_points):
        res = kmeans_fit(square_points, KMeansConfig(k=2, seed=0))
        assert sorted(map(tuple, res.centroids)) == [(0.0, 1.0), (10.0, 1.0)]
        assert res.sse == pytest.approx(4.0)
        assert res.sse == pytest.approx(brute_force_min_sse(square_points, 2))

    def test_k_one_mean(self):
        pts = np.random.default_rng(2).normal(size=(40, 3))
        res = kmeans_fit(pts, KMeansConfig(k=1))
        np.testing.assert_allclose(res.centroids[0], pts.mean(axis=0), atol=1e-12)

    def test_k_equals_n(self):
        pts = np.random.default_rng(3).normal(size=(9, 2))
        res = kmeans_fit(pts, KMeansConfig(k=9, seed=4))
        assert res.sse == 0.0
        assert sorted(map(tuple, res.centroids)) == sorted(map(tuple, pts))

    def test_errors(self):
        with pytest.raises(KTooLarge):
            kmeans_fit(np.zeros((3, 2)), KMeansConfig(k=4))
        with pytest.raises(EmptyInput):
            kmeans_fit(np.zeros((0, 2)), KMeansConfig(k=1))
        with pytest.raises(InvalidSpec):
            KMeansConfig(k=0)

    def test_duplicate_points_keep_clusters_nonempty(self):
        pts = np.array([[1.0, 1.0]] * 4 + [[3.0, 3.0]] * 2)
        res = kmeans_fit(pts, KMeansConfig(k=4, seed=1))
        assert np.bincount(res.assignments, minlength=4).min() >= 1

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 60), st.integers(1, 6), st.integers(0, 2**32), st.integers(1, 12))
    def test_invariants(self, n, dim, seed, k):
        k = min(k, n)
        pts = np.random.default_rng(seed).normal(size=(n, dim)).round(1)
        cfg = KMeansConfig(k=k, seed=seed)
        res = kmeans_fit(pts, cfg)
        labels = res.assignments
        assert labels.min() >= 0 and labels.max() < k
        assert np.bincount(labels, minlength=k).min() >= 1
        recomputed = sum(naive_distance(p, res.centroids[j]) ** 2 for p, j in zip(pts, labels))
        assert res.sse == pytest.approx(recomputed, rel=1e-9, abs=1e-12)
        trace = np.array(res.sse_trace)
        assert np.all(np.diff(trace) <= 1e-9 * np.maximum(trace[:-1], 1.0))
        again = kmeans_fit(pts, cfg)
        np.testing.assert_array_equal(again.centroids, res.centroids)
        np.testing.assert_array_equal(again.assignments, labels)
        if len({tuple(p) for p in pts}) == n:
            np.testing.assert_array_equal(assign_points(pts, res.centroids), labels)


def test_well_separated_matches_brute_force():
    rng = random.Random(11)
    for i in range(150):
        n = rng.randint(1, 8)
        k = rng.randint(1, min(3, n))
        pts = well_separated_instance(rng, n, k)
        res = kmeans_fit(pts, KMeansConfig(k=k, seed=i))
        assert math.isclose(res.sse, brute_force_min_sse(pts, k), rel_tol=1e-9, abs_tol=1e-12)
