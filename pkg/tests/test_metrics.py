import itertools
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evobic.core import Bicluster, bicluster_cells
from evobic.metrics import (
    UndefinedMetric,
    clustering_error,
    hungarian_max,
    intersection_matrix,
    recovery,
    relevance,
)


def brute_assignment(w):
    w = np.asarray(w)
    n_rows, n_cols = w.shape
    if n_rows <= n_cols:
        return max(sum(w[i, j] for i, j in zip(range(n_rows), perm))
                   for perm in itertools.permutations(range(n_cols), n_rows))
    return brute_assignment(w.T)


def covered(biclusters):
    counts = Counter()
    for b in biclusters:
        counts.update(bicluster_cells(b))
    return counts


def brute_ce(found, truth):
    cf, ct = covered(found), covered(truth)
    union = sum(max(cf[c], ct[c]) for c in cf.keys() | ct.keys())
    if not found or not truth:
        return 0.0
    w = [[len(bicluster_cells(f) & bicluster_cells(t)) for t in truth] for f in found]
    return brute_assignment(w) / union


def random_set(rng, k, grid=30):
    out = []
    for _ in range(k):
        nr, nc = rng.randint(1, 10), rng.randint(1, 10)
        out.append(Bicluster(tuple(rng.sample(range(grid), nr)), tuple(rng.sample(range(grid), nc))))
    return out


small_sets = st.lists(
    st.builds(
        Bicluster,
        st.lists(st.integers(0, 9), min_size=1, max_size=5).map(tuple),
        st.lists(st.integers(0, 9), min_size=1, max_size=5).map(tuple),
    ),
    min_size=1,
    max_size=4,
)


class TestHungarian:
    def test_identity(self):
        assignment, total = hungarian_max([[5, 0], [0, 5]])
        assert assignment == [(0, 0), (1, 1)] and total == 10

    def test_anti_diagonal(self):
        assert hungarian_max([[1, 9], [9, 1]]) == ([(0, 1), (1, 0)], 18)

    def test_rectangular_drops_padding(self):
        assignment, total = hungarian_max([[1, 2, 7]])
        assert assignment == [(0, 2)] and total == 7
        assignment, total = hungarian_max([[1], [4], [2]])
        assert assignment == [(1, 0)] and total == 4

    def test_integer_total_type(self):
        assert isinstance(hungarian_max(np.array([[3]]))[1], int)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            hungarian_max(np.zeros((0, 3)))

    def test_random_against_permutations(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            w = rng.integers(0, 50, size=(rng.integers(1, 6), rng.integers(1, 6)))
            assert hungarian_max(w)[1] == brute_assignment(w)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_permutation_invariance(self, r, c, seed):
        rng = np.random.default_rng(seed)
        w = rng.integers(0, 100, size=(r, c))
        total = hungarian_max(w)[1]
        assert hungarian_max(w[rng.permutation(r)][:, rng.permutation(c)])[1] == total


class TestClusteringError:
    def test_identical_sets(self):
        s = [Bicluster((0, 1), (0, 1)), Bicluster((5, 6), (2, 3))]
        assert clustering_error(s, s) == 1.0

    def test_half_overlap(self):
        # shared 2 cells, union 6 cells
        assert clustering_error([Bicluster((0, 1), (0, 1))], [Bicluster((1, 2), (0, 1))]) == 2 / 6

    def test_overlapping_set_against_itself(self):
        s = [Bicluster((0, 1, 2), (0, 1, 2)), Bicluster((2, 3), (2, 3))]
        assert clustering_error(s, s) == 1.0
        # the shared cell (2, 2) counts once per covering bicluster
        assert intersection_matrix(s, s).union_size == 13

    def test_disjoint(self):
        assert clustering_error([Bicluster((0,), (0,))], [Bicluster((1,), (1,))]) == 0.0

    def test_one_side_empty(self):
        assert clustering_error([], [Bicluster((0,), (0,))]) == 0.0

    def test_both_empty_undefined(self):
        with pytest.raises(UndefinedMetric):
            clustering_error([], [])

    def test_matrix_shape(self):
        im = intersection_matrix([Bicluster((0,), (0,))], [Bicluster((0,), (0,)), Bicluster((1,), (1,))])
        assert im.counts.tolist() == [[1, 0]] and im.union_size == 2

    def test_matches_brute_force(self):
        rng = random.Random(1)
        for _ in range(100):
            f = random_set(rng, rng.randint(1, 5))
            t = random_set(rng, rng.randint(1, 5))
            assert clustering_error(f, t) == pytest.approx(brute_ce(f, t), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(small_sets, small_sets)
    def test_symmetric_and_bounded(self, f, t):
        ce = clustering_error(f, t)
        assert ce == pytest.approx(clustering_error(t, f), abs=1e-12)
        assert 0.0 <= ce <= 1.0
        if ce == 1.0:
            assert sum(b.size for b in f) == sum(b.size for b in t)

    @settings(max_examples=100, deadline=None)
    @given(small_sets, small_sets)
    def test_background_bicluster_lowers_ce(self, f, t):
        # rows 100+ never meet the truth, which lives in rows 0..9
        base = clustering_error(f, t)
        worse = clustering_error(f + [Bicluster((100, 101), (0, 1))], t)
        if base > 0:
            assert worse < base
        else:
            assert worse == 0


class TestRowMetrics:
    def test_identical(self):
        s = [Bicluster((0, 1), (0,)), Bicluster((4,), (1, 2))]
        assert recovery(s, s) == relevance(s, s) == 1.0

    def test_one_found_two_true(self):
        found = [Bicluster((0, 1), (0,))]
        truth = [Bicluster((0, 1), (3,)), Bicluster((5, 6), (0,))]
        assert relevance(found, truth) == 1.0
        assert recovery(found, truth) == 0.5

    @settings(max_examples=100, deadline=None)
    @given(small_sets, small_sets)
    def test_recovery_relevance_duality(self, a, b):
        assert recovery(a, b) == relevance(b, a)

    def test_empty_sides(self):
        truth = [Bicluster((0,), (0,))]
        assert relevance(truth, []) == 0.0
        with pytest.raises(UndefinedMetric):
            relevance([], truth)
        with pytest.raises(UndefinedMetric):
            recovery(truth, [])
