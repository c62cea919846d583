"""Ordered partitions, comparison digraphs, and antichain decomposition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .lattice import LatticeShape

__all__ = [
    "OrderedPartition",
    "ComparisonDigraph",
    "has_cycle",
    "mirsky_decompose",
    "faithful_permutation",
    "build_comparison_graph",
    "sum_threshold",
    "max_threshold",
]


@dataclass(frozen=True)
class OrderedPartition:
    """A partition of ``range(n)`` into ranked, disjoint blocks.

    ``blocks[r]`` holds the indices of rank ``r``; within a block indices are
    kept sorted ascending. The rank map sends index ``i`` to the position of
    its block.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "blocks",
            tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks),
        )
        seen: set[int] = set()
        total = 0
        for block in self.blocks:
            if not block:
                raise ValueError("empty block in ordered partition")
            total += len(block)
            seen.update(block)
        if not self.blocks:
            raise ValueError("ordered partition needs at least one block")
        if len(seen) != total or seen != set(range(total)):
            raise ValueError("blocks must disjointly cover range(n)")

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def card(self) -> int:
        """Number of blocks."""
        return len(self.blocks)

    @property
    def largest_block(self) -> int:
        """Size of the biggest block."""
        return max(len(b) for b in self.blocks)

    def rank(self) -> np.ndarray:
        """rank[i] = position of the block containing i."""
        out = np.empty(self.n, dtype=np.intp)
        for pos, block in enumerate(self.blocks):
            for i in block:
                out[i] = pos
        return out

    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @classmethod
    def singletons(cls, n: int) -> "OrderedPartition":
        return cls(tuple((i,) for i in range(n)))

    @classmethod
    def single_block(cls, n: int) -> "OrderedPartition":
        return cls((tuple(range(n)),))

    @classmethod
    def from_rank(cls, ranks: Sequence[int]) -> "OrderedPartition":
        ranks = [int(r) for r in ranks]
        if not ranks:
            raise ValueError("empty rank map")
        count = max(ranks) + 1
        blocks: list[list[int]] = [[] for _ in range(count)]
        for i, r in enumerate(ranks):
            if r < 0:
                raise ValueError("negative rank")
            blocks[r].append(i)
        return cls(tuple(tuple(b) for b in blocks))

    @classmethod
    def from_interval_sizes(cls, sizes: Sequence[int]) -> "OrderedPartition":
        """Contiguous blocks of the given sizes, in order."""
        blocks = []
        start = 0
        for s in sizes:
            if s < 1:
                raise ValueError("interval sizes must be >= 1")
            blocks.append(tuple(range(start, start + s)))
            start += s
        return cls(tuple(blocks))


@dataclass(frozen=True)
class ComparisonDigraph:
    """A loop-free directed graph on ``range(node_count)``."""

    node_count: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        normalized = set()
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ValueError(f"edge {(u, v)} out of range")
            normalized.add((u, v))
        object.__setattr__(self, "edges", frozenset(normalized))

    def successors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in sorted(self.edges):
            adj[u].append(v)
        return adj

    def in_degrees(self) -> list[int]:
        deg = [0] * self.node_count
        for _, v in self.edges:
            deg[v] += 1
        return deg


def _topological_order(g: ComparisonDigraph) -> list[int] | None:
    """Kahn's algorithm; None when the graph has a directed cycle."""
    adj = g.successors()
    indeg = g.in_degrees()
    frontier = [v for v in range(g.node_count) if indeg[v] == 0]
    order: list[int] = []
    while frontier:
        v = frontier.pop()
        order.append(v)
        for w in adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                frontier.append(w)
    if len(order) != g.node_count:
        return None
    return order


def has_cycle(g: ComparisonDigraph) -> bool:
    """True iff the digraph contains a directed cycle."""
    return _topological_order(g) is None


def mirsky_decompose(g: ComparisonDigraph) -> OrderedPartition:
    """Partition an acyclic digraph's nodes into longest-path levels.

    Block ``r`` collects the nodes whose longest incoming directed path has
    exactly ``r`` edges. Every block is an antichain of the reachability
    order, and the block count (one plus the longest path length) is the
    minimum over all antichain partitions.
    """
    order = _topological_order(g)
    if order is None:
        raise ValueError("mirsky_decompose requires an acyclic digraph")
    adj = g.successors()
    level = [0] * g.node_count
    for v in order:
        for w in adj[v]:
            level[w] = max(level[w], level[v] + 1)
    return OrderedPartition.from_rank(level)


def faithful_permutation(partition: OrderedPartition) -> np.ndarray:
    """A rank map placing lower blocks first; ties broken by ascending index.

    Returns ``pi`` with ``pi[i]`` the final position of index ``i``, so that
    ``pi[i] < pi[j]`` whenever ``rank(i) < rank(j)``.
    """
    pi = np.empty(partition.n, dtype=np.intp)
    pos = 0
    for block in partition.blocks:
        for i in block:
            pi[i] = pos
            pos += 1
    return pi


def sum_threshold(shape: LatticeShape) -> float:
    """Score-difference cutoff: ``8 * sqrt(log n) * n ** ((1 - 1/d) / 2)``."""
    n = shape.n
    return 8.0 * math.sqrt(math.log(n)) * n ** ((1.0 - 1.0 / shape.d) / 2.0)


def max_threshold(shape: LatticeShape) -> float:
    """Entrywise-difference cutoff: ``8 * sqrt(log n)``."""
    return 8.0 * math.sqrt(math.log(shape.n))


def _edges_from_stats(
    sum_stats: np.ndarray,
    max_stats: np.ndarray | None,
    t_sum: float,
    t_max: float,
) -> set:
    hits = sum_stats > t_sum
    if max_stats is not None:
        hits = hits | (max_stats > t_max)
    np.fill_diagonal(hits, False)
    us, vs = np.nonzero(hits)
    return {(int(u), int(v)) for u, v in zip(us, vs)}


def build_comparison_graph(
    sum_stats: np.ndarray,
    max_stats: np.ndarray,
    shape: LatticeShape,
) -> ComparisonDigraph:
    """Threshold pairwise statistics into a directed comparison graph.

    Inserts ``u -> v`` when either statistic strictly exceeds its cutoff
    (equality never creates an edge). If the two-condition graph is cyclic it
    is rebuilt from the sum condition alone, which is acyclic whenever
    ``sum_stats`` is antisymmetric: an edge needs a strictly positive value,
    and values along any cycle telescope to zero.
    """
    sum_stats = np.asarray(sum_stats, dtype=np.float64)
    max_stats = np.asarray(max_stats, dtype=np.float64)
    n1 = shape.n1
    for name, m in (("sum_stats", sum_stats), ("max_stats", max_stats)):
        if m.shape != (n1, n1):
            raise ValueError(f"{name} must be {n1}x{n1}, got {m.shape}")
        if np.any(np.diag(m) != 0.0):
            raise ValueError(f"{name} must have a zero diagonal")
    t_sum = sum_threshold(shape)
    t_max = max_threshold(shape)
    g = ComparisonDigraph(n1, frozenset(_edges_from_stats(sum_stats, max_stats, t_sum, t_max)))
    if has_cycle(g):
        g = ComparisonDigraph(n1, frozenset(_edges_from_stats(sum_stats, None, t_sum, t_max)))
    return g
