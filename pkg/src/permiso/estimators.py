"""Latent-permutation denoisers: score statistics, three estimators, oracles.

The functional layer returns :class:`EstimateResult`; the sklearn-style
classes at the bottom wrap it with the usual fit/transform/predict surface.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import SizeCapExceeded, as_float_tensor, check_axis, check_balanced
from .lattice import LatticeShape, PermutationTuple, apply_permutations, derive_rng
from .orders import (
    ComparisonDigraph,
    OrderedPartition,
    build_comparison_graph,
    has_cycle,
    max_threshold,
    mirsky_decompose,
    sum_threshold,
)
from .solvers import block_isotonic_project, isotonic_project

__all__ = [
    "PairwiseStats",
    "EstimateResult",
    "scores",
    "pairwise_stats",
    "perm_projection_lse",
    "mirsky_partition_estimate",
    "borda_count_estimate",
    "crl_estimate",
    "global_lse_bruteforce",
    "permutation_lemma_check",
    "MirskyPartitionEstimator",
    "BordaCountEstimator",
    "CRLEstimator",
]

BRUTE_FORCE_MAX_N1 = 4
BRUTE_FORCE_MAX_D = 3


@dataclass(frozen=True)
class PairwiseStats:
    """Score differences and max entrywise slice differences along one axis."""

    axis: int
    sum_diff: np.ndarray  # sum_diff[k, l] = tau(l) - tau(k); antisymmetric
    max_diff: np.ndarray  # max over matching off-axis cells of Y[l] - Y[k]

    def __post_init__(self) -> None:
        self.sum_diff.flags.writeable = False
        self.max_diff.flags.writeable = False


@dataclass(frozen=True)
class EstimateResult:
    theta_hat: np.ndarray
    partitions: tuple | None
    perms: PermutationTuple | None
    method: str

    def __post_init__(self) -> None:
        self.theta_hat.flags.writeable = False


def scores(Y, axis: int) -> np.ndarray:
    """Per-index slice sums along one axis: ``tau[k] = sum of cells with i_axis = k``."""
    y = as_float_tensor(Y)
    check_balanced(y)
    axis = check_axis(axis, y.ndim)
    other = tuple(a for a in range(y.ndim) if a != axis)
    return y.sum(axis=other) if other else y.copy()


def pairwise_stats(Y, axis: int) -> PairwiseStats:
    """Both pairwise comparison statistics for one axis."""
    y = as_float_tensor(Y)
    check_balanced(y)
    axis = check_axis(axis, y.ndim)
    n1 = y.shape[0]
    tau = scores(y, axis)
    sum_diff = tau[None, :] - tau[:, None]
    slices = np.moveaxis(y, axis, 0).reshape(n1, -1)
    max_diff = (slices[None, :, :] - slices[:, None, :]).max(axis=2)
    return PairwiseStats(axis=axis, sum_diff=sum_diff, max_diff=max_diff)


def perm_projection_lse(
    Y, perms: PermutationTuple, box_radius: float | None = None
) -> np.ndarray:
    """Least-squares fit over tensors monotone when viewed along ``perms``.

    Permutes the observations by the inverse tuple, projects onto the
    isotonic cone (optionally intersected with the sup-norm box), and
    permutes back.
    """
    y = as_float_tensor(Y)
    check_balanced(y)
    aligned = apply_permutations(y, perms.inverse())
    fitted = isotonic_project(aligned, box_radius=box_radius)
    return apply_permutations(fitted, perms)


def mirsky_partition_estimate(Y, box_radius: float | None = None) -> EstimateResult:
    """Cluster each axis by thresholded comparisons, then project onto the blocks.

    Per axis: build the comparison digraph from the pairwise statistics
    (falling back to the sum condition alone if the combined graph is
    cyclic), decompose it into longest-path antichain levels, and finally
    project the observations onto tensors constant on the resulting blocks
    and monotone in block rank.
    """
    y = as_float_tensor(Y)
    check_balanced(y)
    shape = LatticeShape.of(y)
    partitions = []
    for axis in range(shape.d):
        st = pairwise_stats(y, axis)
        graph = build_comparison_graph(st.sum_diff, st.max_diff, shape)
        partitions.append(mirsky_decompose(graph))
    theta = block_isotonic_project(y, partitions, box_radius)
    return EstimateResult(
        theta_hat=theta, partitions=tuple(partitions), perms=None, method="mp"
    )


def _borda_order(tau: np.ndarray) -> np.ndarray:
    """Indices sorted by score, ties broken by ascending index."""
    return np.argsort(tau, kind="stable")


def borda_count_estimate(Y, box_radius: float | None = None) -> EstimateResult:
    """Sort each axis by its score vector, then least-squares project."""
    y = as_float_tensor(Y)
    check_balanced(y)
    shape = LatticeShape.of(y)
    rank_maps = []
    for axis in range(shape.d):
        order = _borda_order(scores(y, axis))
        rank_maps.append(np.argsort(order))
    perms = PermutationTuple(rank_maps)
    theta = perm_projection_lse(y, perms, box_radius)
    return EstimateResult(theta_hat=theta, partitions=None, perms=perms, method="bc")


def _constrained_order(
    n1: int, edges: set, borda_rank: np.ndarray
) -> list:
    """Topological order satisfying every edge, preferring low Borda rank."""
    indeg = [0] * n1
    adj: list[list[int]] = [[] for _ in range(n1)]
    for u, v in sorted(edges):
        adj[u].append(v)
        indeg[v] += 1
    heap = [(int(borda_rank[v]), v) for v in range(n1) if indeg[v] == 0]
    heapq.heapify(heap)
    out: list[int] = []
    while heap:
        _, v = heapq.heappop(heap)
        out.append(v)
        for w in adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, (int(borda_rank[w]), w))
    return out


def _indistinguishable_window(
    order: np.ndarray, sum_diff: np.ndarray, max_diff: np.ndarray,
    t_sum: float, t_max: float,
) -> list:
    """Largest contiguous run in score order with every pair below both cutoffs.

    Pair validity is hereditary, so a two-pointer scan suffices; ties go to
    the leftmost window.
    """
    n1 = len(order)
    best_start, best_size = 0, 1
    start = 0
    for stop in range(1, n1 + 1):
        # shrink until order[stop-1] is compatible with the whole window
        new = order[stop - 1]
        while start < stop - 1:
            ok = True
            for t in range(start, stop - 1):
                u = order[t]
                if (
                    sum_diff[u, new] > t_sum
                    or sum_diff[new, u] > t_sum
                    or max_diff[u, new] > t_max
                    or max_diff[new, u] > t_max
                ):
                    ok = False
                    break
            if ok:
                break
            start += 1
        if stop - start > best_size:
            best_start, best_size = start, stop - start
    return [int(v) for v in order[best_start : best_start + best_size]]


def crl_estimate(
    Y, rng: np.random.Generator, box_radius: float | None = None
) -> EstimateResult:
    """Count, randomize, least squares.

    Per axis: start from the Borda order; enforce every precedence pair
    ``k before l`` whose max statistic exceeds the cutoff (a directed cycle
    among those constraints means no order can satisfy them, so the Borda
    order is kept and randomization is skipped); find the largest window of
    mutually indistinguishable indices in score order and shuffle those
    indices among their positions. Finish with the permutation projection.
    """
    y = as_float_tensor(Y)
    check_balanced(y)
    shape = LatticeShape.of(y)
    t_sum = sum_threshold(shape)
    t_max = max_threshold(shape)
    n1 = shape.n1
    rank_maps = []
    for axis in range(shape.d):
        st = pairwise_stats(y, axis)
        order = _borda_order(scores(y, axis))
        borda_rank = np.argsort(order)
        edges = {
            (int(u), int(v))
            for u, v in zip(*np.nonzero(st.max_diff > t_max))
        }
        if has_cycle(ComparisonDigraph(n1, frozenset(edges))):
            rank_maps.append(borda_rank)
            continue
        pruned = _constrained_order(n1, edges, borda_rank)
        window = _indistinguishable_window(order, st.sum_diff, st.max_diff, t_sum, t_max)
        members = set(window)
        positions = [t for t, e in enumerate(pruned) if e in members]
        shuffled = rng.permutation(np.array([pruned[t] for t in positions]))
        final = list(pruned)
        for t, e in zip(positions, shuffled):
            final[t] = int(e)
        rank = np.empty(n1, dtype=np.intp)
        for t, e in enumerate(final):
            rank[e] = t
        rank_maps.append(rank)
    perms = PermutationTuple(rank_maps)
    theta = perm_projection_lse(y, perms, box_radius)
    return EstimateResult(theta_hat=theta, partitions=None, perms=perms, method="crl")


def global_lse_bruteforce(Y, box_radius: float | None = None) -> EstimateResult:
    """Exhaustive least squares over every permutation tuple.

    Enumerates all ``(n1!)**d`` tuples in lexicographic order and keeps the
    first one attaining the smallest squared residual. Ties are resolved
    toward the earlier tuple; residuals computed through the iterative
    projection carry ~1e-10 convergence noise, so anything within a small
    relative tolerance of the incumbent counts as a tie.
    """
    y = as_float_tensor(Y)
    check_balanced(y)
    shape = LatticeShape.of(y)
    if shape.n1 > BRUTE_FORCE_MAX_N1 or shape.d > BRUTE_FORCE_MAX_D:
        raise SizeCapExceeded(
            f"brute force capped at n1 <= {BRUTE_FORCE_MAX_N1}, d <= {BRUTE_FORCE_MAX_D}; "
            f"got n1={shape.n1}, d={shape.d}"
        )
    best_resid = np.inf
    best_theta = None
    best_perms = None
    for tup in itertools.product(
        itertools.permutations(range(shape.n1)), repeat=shape.d
    ):
        perms = PermutationTuple(tup)
        theta = perm_projection_lse(y, perms, box_radius)
        resid = float(np.sum((y - theta) ** 2))
        if best_theta is None or resid < best_resid - 1e-9 * (1.0 + best_resid):
            best_resid = resid
            best_theta = theta
            best_perms = perms
    return EstimateResult(
        theta_hat=best_theta, partitions=None, perms=best_perms, method="lse-brute"
    )


def permutation_lemma_check(a, b, tau: float, pi) -> bool:
    """Test oracle: positions moved by a premise-respecting permutation.

    For nondecreasing ``a`` and any ``pi`` with ``pi[i] < pi[j]`` whenever
    ``b[j] - b[i] > tau`` (the caller guarantees this premise), checks
    ``max_i |a[pi[i]] - a[i]| <= tau + 2 * max|b - a|``. The inequality is a
    theorem, so a False return flags a bug in the caller or the library.
    """
    av = np.ascontiguousarray(a, dtype=np.float64)
    bv = np.ascontiguousarray(b, dtype=np.float64)
    if av.ndim != 1 or bv.shape != av.shape:
        raise ValueError("a and b must be 1-D sequences of equal length")
    if np.any(np.diff(av) < 0):
        raise ValueError("a must be nondecreasing")
    if not tau > 0:
        raise ValueError("tau must be positive")
    piv = np.ascontiguousarray(pi, dtype=np.intp)
    if sorted(piv.tolist()) != list(range(av.size)):
        raise ValueError("pi is not a permutation")
    lhs = float(np.max(np.abs(av[piv] - av)))
    rhs = float(tau) + 2.0 * float(np.max(np.abs(bv - av)))
    return bool(lhs <= rhs)


# --- sklearn-style wrappers --------------------------------------------------


class _LatticeDenoiser(BaseEstimator, TransformerMixin):
    """Shared fit/transform plumbing for the permuted-isotonic denoisers."""

    def _check_input(self, X) -> np.ndarray:
        x = as_float_tensor(X, name="X")
        check_balanced(x, name="X")
        return x

    def _check_fitted_shape(self, x: np.ndarray) -> None:
        if LatticeShape.of(x) != self.shape_:
            raise ValueError(
                f"tensor shape {x.shape} does not match the fitted lattice {self.shape_}"
            )

    def fit_predict(self, X, y=None):
        return self.fit(X).predict(X)

    def predict(self, X):
        return self.transform(X)


class MirskyPartitionEstimator(_LatticeDenoiser):
    """Denoiser that clusters each axis into ranked blocks before projecting.

    Parameters
    ----------
    box_radius : float or None
        Optional sup-norm bound applied inside the projection.

    Attributes
    ----------
    theta_hat_ : ndarray, the denoised tensor for the fitted data.
    partitions_ : tuple of OrderedPartition, one per axis.
    shape_ : LatticeShape of the fitted tensor.
    """

    def __init__(self, box_radius: float | None = None):
        self.box_radius = box_radius

    def fit(self, X, y=None):
        x = self._check_input(X)
        result = mirsky_partition_estimate(x, self.box_radius)
        self.shape_ = LatticeShape.of(x)
        self.partitions_ = result.partitions
        self.theta_hat_ = result.theta_hat
        return self

    def transform(self, X):
        check_is_fitted(self, "partitions_")
        x = self._check_input(X)
        self._check_fitted_shape(x)
        return block_isotonic_project(x, self.partitions_, self.box_radius)


class BordaCountEstimator(_LatticeDenoiser):
    """Denoiser that sorts each axis by its score vector before projecting.

    Attributes
    ----------
    theta_hat_ : ndarray, the denoised tensor for the fitted data.
    perms_ : PermutationTuple chosen by score sorting.
    shape_ : LatticeShape of the fitted tensor.
    """

    def __init__(self, box_radius: float | None = None):
        self.box_radius = box_radius

    def fit(self, X, y=None):
        x = self._check_input(X)
        result = borda_count_estimate(x, self.box_radius)
        self.shape_ = LatticeShape.of(x)
        self.perms_ = result.perms
        self.theta_hat_ = result.theta_hat
        return self

    def transform(self, X):
        check_is_fitted(self, "perms_")
        x = self._check_input(X)
        self._check_fitted_shape(x)
        return perm_projection_lse(x, self.perms_, self.box_radius)


class CRLEstimator(_LatticeDenoiser):
    """Borda sorting with constraint-driven corrections and tie randomization.

    Parameters
    ----------
    box_radius : float or None
    random_state : None, int, or numpy Generator
        Source of the tie-shuffling randomness; an int seeds a dedicated
        counter-based stream.

    Attributes
    ----------
    theta_hat_, perms_, shape_ : as in the other denoisers.
    """

    def __init__(self, box_radius: float | None = None, random_state=None):
        self.box_radius = box_radius
        self.random_state = random_state

    def _rng(self) -> np.random.Generator:
        rs = self.random_state
        if rs is None:
            return np.random.default_rng()
        if isinstance(rs, np.random.Generator):
            return rs
        if isinstance(rs, (int, np.integer)):
            return derive_rng(int(rs))
        raise TypeError(f"random_state must be None, int, or Generator, got {type(rs)}")

    def fit(self, X, y=None):
        x = self._check_input(X)
        result = crl_estimate(x, self._rng(), self.box_radius)
        self.shape_ = LatticeShape.of(x)
        self.perms_ = result.perms
        self.theta_hat_ = result.theta_hat
        return self

    def transform(self, X):
        check_is_fitted(self, "perms_")
        x = self._check_input(X)
        self._check_fitted_shape(x)
        return perm_projection_lse(x, self.perms_, self.box_radius)
