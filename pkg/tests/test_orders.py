import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from permiso import (
    ComparisonDigraph,
    LatticeShape,
    OrderedPartition,
    build_comparison_graph,
    faithful_permutation,
    has_cycle,
    max_threshold,
    mirsky_decompose,
    sum_threshold,
)


class TestOrderedPartition:
    def test_basic_properties(self):
        p = OrderedPartition((frozenset({1}), frozenset({0, 2})))
        assert p.n == 3
        assert p.card == 2
        assert p.largest_block == 2
        assert p.block_sizes() == (1, 2)
        np.testing.assert_array_equal(p.rank(), [1, 0, 1])

    def test_constructors(self):
        assert OrderedPartition.singletons(3).card == 3
        assert OrderedPartition.single_block(4).largest_block == 4
        p = OrderedPartition.from_rank([1, 0, 1])
        assert p.blocks == ((1,), (0, 2))
        q = OrderedPartition.from_interval_sizes([2, 1])
        assert q.blocks == ((0, 1), (2,))

    def test_validation(self):
        with pytest.raises(ValueError):
            OrderedPartition((frozenset({0}), frozenset({0, 1})))  # overlap
        with pytest.raises(ValueError):
            OrderedPartition((frozenset({0}), frozenset({2})))  # gap
        with pytest.raises(ValueError):
            OrderedPartition((frozenset({0, 1}), frozenset()))  # empty block


class TestHasCycle:
    def test_two_cycle(self):
        assert has_cycle(ComparisonDigraph(2, frozenset({(0, 1), (1, 0)})))

    def test_empty(self):
        assert not has_cycle(ComparisonDigraph(3, frozenset()))

    def test_chain(self):
        assert not has_cycle(ComparisonDigraph(3, frozenset({(0, 1), (1, 2)})))

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            ComparisonDigraph(2, frozenset({(0, 0)}))


class TestMirskyDecompose:
    def test_chain_gives_singletons(self):
        p = mirsky_decompose(ComparisonDigraph(3, frozenset({(0, 1), (1, 2)})))
        assert p.blocks == ((0,), (1,), (2,))

    def test_empty_gives_single_block(self):
        p = mirsky_decompose(ComparisonDigraph(3, frozenset()))
        assert p.blocks == ((0, 1, 2),)

    def test_shared_sink(self):
        p = mirsky_decompose(ComparisonDigraph(3, frozenset({(0, 2), (1, 2)})))
        assert p.blocks == ((0, 1), (2,))

    def test_rejects_cycle(self):
        with pytest.raises(ValueError):
            mirsky_decompose(ComparisonDigraph(2, frozenset({(0, 1), (1, 0)})))

    @given(st.integers(min_value=0, max_value=2**31 - 1), st.integers(4, 6))
    def test_block_count_matches_exhaustive_minimum(self, seed, n):
        rng = np.random.default_rng(seed)
        edges = oracles.random_dag(n, rng)
        part = mirsky_decompose(ComparisonDigraph(n, frozenset(edges)))
        assert part.card == oracles.min_antichain_cover(n, edges)

    @given(st.integers(min_value=0, max_value=2**31 - 1), st.integers(4, 6))
    def test_blocks_are_antichains(self, seed, n):
        rng = np.random.default_rng(seed)
        edges = oracles.random_dag(n, rng)
        part = mirsky_decompose(ComparisonDigraph(n, frozenset(edges)))
        reach = oracles.transitive_reach(n, edges)
        for block in part.blocks:
            for u in block:
                for v in block:
                    assert not (reach[u] >> v) & 1

    @given(st.integers(min_value=0, max_value=2**31 - 1), st.integers(4, 6))
    def test_edges_point_to_strictly_later_blocks(self, seed, n):
        rng = np.random.default_rng(seed)
        edges = oracles.random_dag(n, rng)
        part = mirsky_decompose(ComparisonDigraph(n, frozenset(edges)))
        rank = part.rank()
        for u, v in edges:
            assert rank[u] < rank[v]


class TestFaithfulPermutation:
    def test_two_blocks(self):
        p = OrderedPartition((frozenset({1}), frozenset({0, 2})))
        np.testing.assert_array_equal(faithful_permutation(p), [1, 0, 2])

    def test_single_block_is_identity(self):
        p = OrderedPartition.single_block(3)
        np.testing.assert_array_equal(faithful_permutation(p), [0, 1, 2])

    def test_reversal(self):
        p = OrderedPartition((frozenset({2}), frozenset({1}), frozenset({0})))
        np.testing.assert_array_equal(faithful_permutation(p), [2, 1, 0])

    @given(st.integers(min_value=0, max_value=2**31 - 1), st.integers(2, 7))
    def test_respects_block_ranks(self, seed, n):
        rng = np.random.default_rng(seed)
        ranks = rng.integers(0, 3, size=n)
        ranks -= ranks.min()  # rank 0 must be present
        seen = sorted(set(int(r) for r in ranks))
        relabel = {r: i for i, r in enumerate(seen)}
        part = OrderedPartition.from_rank([relabel[int(r)] for r in ranks])
        pi = faithful_permutation(part)
        rank = part.rank()
        for i in range(n):
            for j in range(n):
                if rank[i] < rank[j]:
                    assert pi[i] < pi[j]


class TestThresholds:
    def test_frozen_values_d2(self):
        # 8 sqrt(log 4) * 4**(1/4) and 8 sqrt(log 4)
        shape = LatticeShape(2, 2)
        assert math.isclose(sum_threshold(shape), 13.321, rel_tol=5e-4)
        assert math.isclose(max_threshold(shape), 9.4193, rel_tol=5e-4)

    def test_frozen_values_d2_n16(self):
        shape = LatticeShape(2, 16)
        assert math.isclose(sum_threshold(shape), 75.354, rel_tol=5e-4)
        assert math.isclose(max_threshold(shape), 18.839, rel_tol=5e-4)

    def test_formula_agreement(self):
        for d, n1 in [(1, 8), (2, 5), (3, 4)]:
            shape = LatticeShape(d, n1)
            n = n1**d
            want_max = 8.0 * math.sqrt(math.log(n))
            want_sum = want_max * n ** ((1.0 - 1.0 / d) / 2.0)
            assert math.isclose(max_threshold(shape), want_max, rel_tol=1e-12)
            assert math.isclose(sum_threshold(shape), want_sum, rel_tol=1e-12)


class TestBuildComparisonGraph:
    def shape(self):
        return LatticeShape(2, 2)

    def test_small_stats_give_empty_graph(self):
        sum_stats = np.array([[0.0, 2.0], [-2.0, 0.0]])
        max_stats = np.array([[0.0, 1.0], [0.0, 0.0]])
        g = build_comparison_graph(sum_stats, max_stats, self.shape())
        assert g.edges == frozenset()

    def test_large_sum_stat_creates_edge(self):
        sum_stats = np.array([[0.0, 20.0], [-20.0, 0.0]])
        max_stats = np.zeros((2, 2))
        g = build_comparison_graph(sum_stats, max_stats, self.shape())
        assert g.edges == frozenset({(0, 1)})

    def test_cyclic_max_stats_fall_back_to_sum_only(self):
        """Junk max stats that force a 2-cycle get pruned away entirely."""
        sum_stats = np.zeros((2, 2))
        max_stats = np.array([[0.0, 10.0], [10.0, 0.0]])
        g = build_comparison_graph(sum_stats, max_stats, self.shape())
        assert g.edges == frozenset()

    def test_equality_with_threshold_is_not_an_edge(self):
        shape = self.shape()
        t = sum_threshold(shape)
        sum_stats = np.array([[0.0, t], [-t, 0.0]])
        g = build_comparison_graph(sum_stats, np.zeros((2, 2)), shape)
        assert g.edges == frozenset()

    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_score_derived_graphs_are_acyclic(self, seed):
        """Antisymmetric sum stats can never survive as a cycle."""
        rng = np.random.default_rng(seed)
        n1 = int(rng.integers(3, 7))
        shape = LatticeShape(2, n1)
        tau = rng.normal(scale=2.0 * sum_threshold(shape), size=n1)
        sum_stats = tau[None, :] - tau[:, None]
        max_stats = rng.normal(
            scale=2.0 * max_threshold(shape), size=(n1, n1)
        )
        np.fill_diagonal(max_stats, 0.0)
        g = build_comparison_graph(sum_stats, max_stats, shape)
        assert not has_cycle(g)
