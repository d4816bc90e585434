from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypfed.errors import DomainError, EmptyInputError, InfeasibleGroupingError
from hypfed.partition import (DIST_FLOOR, HullGraph, build_hull_graph, cut_weight, exhaustive_bisect, group_hulls,
                              kernighan_lin_bisect, kl_best_of, spectral_group)

from conftest import cayley_dist


def brute_min_cut(W):
    """Oracle: smallest balanced cut by listing every half containing node 0."""
    n = len(W)
    best = np.inf
    for S in combinations(range(n), n // 2):
        if 0 not in S:
            continue
        inside = np.zeros(n, bool)
        inside[list(S)] = True
        best = min(best, W[inside][:, ~inside].sum())
    return best


def random_weights(rng, n):
    W = rng.uniform(0.01, 1.0, (n, n))
    W = (W + W.T) / 2
    np.fill_diagonal(W, 0)
    return W


def planted(rng, sizes, near=0.1, far=5.0, jitter=0.02):
    labels = np.repeat(np.arange(len(sizes)), sizes)
    same = labels[:, None] == labels[None, :]
    D = np.where(same, near, far) * rng.uniform(1 - jitter, 1 + jitter, (len(labels),) * 2)
    D = (D + D.T) / 2
    W = 1 / D
    np.fill_diagonal(W, 0)
    return W, labels


def same_partition(a, b):
    return all(len({(x, y) for x, y in zip(a, b) if x == g}) == 1 for g in set(a))


class TestGraph:
    def test_singletons(self):
        g = build_hull_graph([[[0.3, 0.0]], [[0.0, 0.4]]])
        d = cayley_dist([0.3, 0.0], [0.0, 0.4])
        assert g.weights[0, 1] == pytest.approx(1 / d, rel=1e-12)

    def test_four_term_mean(self):
        A = np.array([[0.2, 0], [0.4, 0]])
        B = np.array([[-0.2, 0], [-0.4, 0]])
        d = np.mean([cayley_dist(a, b) for a in A for b in B])
        g = build_hull_graph([A, B])
        assert 1 / g.weights[0, 1] == pytest.approx(d, rel=1e-12)
        assert g.weights[0, 1] == g.weights[1, 0]

    def test_identical_singletons_floored(self):
        g = build_hull_graph([[[0.1, 0.1]], [[0.1, 0.1]], [[0.5, 0]]])
        assert g.weights[0, 1] == 1 / DIST_FLOOR

    def test_errors(self):
        with pytest.raises(DomainError):
            build_hull_graph([[[0.1, 0.1]]])
        with pytest.raises(EmptyInputError):
            build_hull_graph([[[0.1, 0.1]], np.zeros((0, 2))])


class TestKL:
    def test_two_nodes(self):
        gr = kernighan_lin_bisect(np.array([[0, 1.0], [1.0, 0]]))
        assert sorted(gr.assignment) == [0, 1]

    def test_odd(self):
        with pytest.raises(DomainError):
            kernighan_lin_bisect(np.zeros((3, 3)))

    def test_planted_four(self):
        rng = np.random.default_rng(0)
        W, lab = planted(rng, [4, 4])
        perm = rng.permutation(8)
        W, lab = W[np.ix_(perm, perm)], lab[perm]
        gr = kernighan_lin_bisect(W)
        assert same_partition(gr.assignment, lab)
        assert cut_weight(W, gr.assignment) == pytest.approx(brute_min_cut(W))

    def test_planted_recovery(self):
        rng = np.random.default_rng(1)
        hits = 0
        for _ in range(100):
            L = int(rng.integers(2, 11))
            W, lab = planted(rng, [L, L], jitter=0.3)
            perm = rng.permutation(2 * L)
            hits += same_partition(kernighan_lin_bisect(W[np.ix_(perm, perm)]).assignment, lab[perm])
        assert hits == 100

    def test_restarts_beat_random_splits(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            W = random_weights(rng, 8)
            kl = cut_weight(W, kl_best_of(W).assignment)
            splits = [cut_weight(W, rng.permutation(np.arange(8) % 2)) for _ in range(100)]
            assert kl <= min(splits) + 1e-12

    def test_optimal_on_small(self):
        rng = np.random.default_rng(3)
        equal = 0
        for _ in range(100):
            W = random_weights(rng, 8)
            kl = cut_weight(W, kernighan_lin_bisect(W).assignment)
            opt = brute_min_cut(W)
            assert kl >= opt - 1e-12
            equal += abs(kl - opt) <= 1e-9 * opt
        assert equal >= 90

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([4, 6, 8, 10, 12]))
    def test_monotone_and_balanced(self, seed, n):
        W = random_weights(np.random.default_rng(seed), n)
        gr = kernighan_lin_bisect(W)
        assert np.all(np.diff(gr.history) <= 1e-12)
        assert np.sum(gr.assignment == 0) == n // 2
        assert gr.history[-1] == pytest.approx(cut_weight(W, gr.assignment))

    def test_exhaustive_helper(self):
        W = random_weights(np.random.default_rng(4), 8)
        assert exhaustive_bisect(W).history[0] == pytest.approx(brute_min_cut(W))


class TestSpectral:
    def test_planted_three(self):
        rng = np.random.default_rng(5)
        W, lab = planted(rng, [3, 3, 3])
        gr = spectral_group(W, 3, same_client=False)
        assert same_partition(gr.assignment, lab)
        assert all(len(g) == 3 for g in gr.groups())

    def test_same_client_separated(self):
        from hypfed.partition import HullGraph
        for seed in range(100):
            rng = np.random.default_rng(seed)
            L, J = 4, 3
            W = random_weights(rng, L * J)
            client = np.repeat(np.arange(L), J)
            gr = spectral_group(HullGraph(W, client), J, seed=seed)
            for c in range(L):
                assert len(set(gr.assignment[client == c])) == J
            assert np.all(np.bincount(gr.assignment) == L)

    def test_two_groups_match_kl_on_planted(self):
        rng = np.random.default_rng(6)
        W, lab = planted(rng, [5, 5])
        assert same_partition(spectral_group(W, 2, same_client=False).assignment,
                              kernighan_lin_bisect(W).assignment)

    def test_infeasible(self):
        from hypfed.partition import HullGraph
        W = random_weights(np.random.default_rng(7), 6)
        with pytest.raises(InfeasibleGroupingError):
            spectral_group(HullGraph(W, np.array([0, 0, 0, 1, 1, 1])), 2)
        with pytest.raises(DomainError):
            spectral_group(W, 4)

    def test_dispatch(self):
        W, lab = planted(np.random.default_rng(8), [3, 3])
        assert same_partition(group_hulls(W, 2).assignment, lab)


def test_two_groups_split_same_client_pairs():
    # each client's two hulls are the closest pair, so a plain min cut keeps them together
    W = np.full((4, 4), 0.1)
    W[0, 1] = W[1, 0] = W[2, 3] = W[3, 2] = 10.0
    np.fill_diagonal(W, 0)
    g = HullGraph(W, np.array([0, 0, 1, 1]))
    a = group_hulls(g, 2).assignment
    assert a[0] != a[1] and a[2] != a[3]
    plain = group_hulls(g, 2, same_client=False).assignment
    assert plain[0] == plain[1]
