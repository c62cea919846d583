"""Hypergraph models, the Gaussian rejection kernel, and the detection test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Callable, Iterator

import numpy as np

from ._validation import as_float_tensor
from .lattice import LatticeShape
from .orders import OrderedPartition
from .solvers import block_average

__all__ = [
    "Hypergraph",
    "RejectionKernelParams",
    "sample_null",
    "sample_planted",
    "sample_planted_with_vertices",
    "zoom_tensor",
    "rejection_kernel",
    "kernelize_tensor",
    "canonical_rho",
    "canonical_iteration_cap",
    "da_test",
    "clique_block_average_estimator",
    "write_hypergraph",
    "read_hypergraph",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Hypergraph:
    """A D-uniform hypergraph on vertices ``range(N)``; edges are sorted tuples."""

    N: int
    D: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.D < 2:
            raise ValueError("uniformity D must be >= 2")
        if self.N < self.D:
            raise ValueError("need at least D vertices")
        normalized = set()
        for e in self.edges:
            t = tuple(sorted(int(v) for v in e))
            if len(t) != self.D or len(set(t)) != self.D:
                raise ValueError(f"edge {e!r} is not a D-subset")
            if t[0] < 0 or t[-1] >= self.N:
                raise ValueError(f"edge {t} out of vertex range")
            normalized.add(t)
        object.__setattr__(self, "edges", frozenset(normalized))


def _colex_subsets(n: int, k: int) -> Iterator[tuple]:
    """All k-subsets of range(n), sorted tuples, in colexicographic order."""
    if k == 0:
        yield ()
        return
    for last in range(k - 1, n):
        for prefix in _colex_subsets(last, k - 1):
            yield prefix + (last,)


def sample_null(N: int, D: int, p: float, rng: np.random.Generator) -> Hypergraph:
    """Include every D-subset independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must be in [0, 1], got {p}")
    if D > N:
        raise ValueError("D exceeds the vertex count")
    edges = {s for s in _colex_subsets(N, D) if rng.random() < p}
    return Hypergraph(N=N, D=D, edges=frozenset(edges))


def sample_planted_with_vertices(
    N: int, D: int, p: float, K: int, rng: np.random.Generator
):
    """Planted model returning both the hypergraph and the planted vertex set.

    Picks K vertices uniformly at random, includes all their D-subsets, and
    every other D-subset independently with probability p.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must be in [0, 1], got {p}")
    if not D <= K <= N:
        raise ValueError(f"need D <= K <= N, got D={D}, K={K}, N={N}")
    clique = set(int(v) for v in rng.choice(N, size=K, replace=False))
    edges = set()
    for s in _colex_subsets(N, D):
        if all(v in clique for v in s):
            edges.add(s)
        elif rng.random() < p:
            edges.add(s)
    return Hypergraph(N=N, D=D, edges=frozenset(edges)), tuple(sorted(clique))


def sample_planted(
    N: int, D: int, p: float, K: int, rng: np.random.Generator
) -> Hypergraph:
    """Planted-structure model: a K-clique of edges plus background noise."""
    graph, _ = sample_planted_with_vertices(N, D, p, K, rng)
    return graph


def zoom_tensor(graph: Hypergraph, d: int, n1: int) -> np.ndarray:
    """Binary tensor reading one vertex slab per axis.

    Cell (i_1, ..., i_d) is 1 iff the edge (i_1, i_2 + n1, ...,
    i_d + (d-1) n1) is present; requires N = n1 * d and D = d.
    """
    if graph.N != n1 * d:
        raise ValueError(f"need N = n1 * d, got N={graph.N}, n1={n1}, d={d}")
    if graph.D != d:
        raise ValueError(f"need D = d, got D={graph.D}, d={d}")
    shape = LatticeShape(d, n1)
    out = np.zeros(shape.dims)
    offsets = tuple(a * n1 for a in range(d))
    for cell in np.ndindex(*shape.dims):
        edge = tuple(sorted(c + o for c, o in zip(cell, offsets)))
        if edge in graph.edges:
            out[cell] = 1.0
    return out


@dataclass(frozen=True)
class RejectionKernelParams:
    """Accept/reject parameters: mean shift rho, source probabilities, loop cap."""

    rho: float
    p: float = 1.0
    q: float = 0.5
    T: int = 1

    def __post_init__(self) -> None:
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if not 0.0 < self.q < self.p <= 1.0:
            raise ValueError(f"need 0 < q < p <= 1, got p={self.p}, q={self.q}")
        # T = 0 is allowed as a degenerate cap: the loop never runs and the
        # kernel returns 0 unconditionally.
        if not (isinstance(self.T, (int, np.integer)) and self.T >= 0):
            raise ValueError(f"iteration cap T must be an integer >= 0, got {self.T!r}")


def canonical_rho(d: int, n1: int) -> float:
    """Mean shift ``log 2 / (2 sqrt(6 (d+1) log n1 + 2 log 2))``."""
    if n1 < 2:
        raise ValueError("n1 must be >= 2")
    return math.log(2.0) / (2.0 * math.sqrt(6.0 * (d + 1) * math.log(n1) + 2.0 * math.log(2.0)))


def canonical_iteration_cap(d: int, n1: int) -> int:
    """Loop cap ``ceil(6 (d+1) log(n1) / log 2)``."""
    if n1 < 2:
        raise ValueError("n1 must be >= 2")
    return math.ceil(6.0 * (d + 1) * math.log(n1) / math.log(2.0))


def canonical_kernel_params(d: int, n1: int) -> RejectionKernelParams:
    return RejectionKernelParams(
        rho=canonical_rho(d, n1), p=1.0, q=0.5, T=canonical_iteration_cap(d, n1)
    )


def _phi(x: float, mean: float) -> float:
    return math.exp(-0.5 * (x - mean) * (x - mean)) / _SQRT_2PI


def rejection_kernel(
    b: int, params: RejectionKernelParams, rng: np.random.Generator
) -> float:
    """Map one bit to a sample close to N(0,1) (b=0) or N(rho,1) (b=1).

    Each iteration draws a standard normal proposal. For b=0 the proposal z'
    is kept with probability 1 - q phi_rho(z') / (p phi_0(z')) whenever that
    ratio is at most one; for b=1 the shifted proposal z' + rho is kept with
    probability 1 - (1-p) phi_0(z'+rho) / ((1-q) phi_rho(z'+rho)) under the
    analogous dominance condition. Returns 0.0 if no iteration accepts.
    """
    if b not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {b!r}")
    rho, p, q = params.rho, params.p, params.q
    for _ in range(params.T):
        z = float(rng.standard_normal())
        if b == 0:
            f0 = p * _phi(z, 0.0)
            f1 = q * _phi(z, rho)
            if f0 >= f1 and rng.random() < 1.0 - f1 / f0:
                return z
        else:
            shifted = z + rho
            g1 = (1.0 - q) * _phi(shifted, rho)
            g0 = (1.0 - p) * _phi(shifted, 0.0)
            if g1 >= g0 and rng.random() < 1.0 - g0 / g1:
                return shifted
    return 0.0


def kernelize_tensor(
    bits, params: RejectionKernelParams, rng: np.random.Generator
) -> np.ndarray:
    """Apply the rejection kernel to every cell of a binary tensor, row-major."""
    arr = as_float_tensor(bits, name="bits")
    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    for i, v in enumerate(flat):
        if v not in (0.0, 1.0):
            raise ValueError(f"cell value {v} is not a bit")
        out[i] = rejection_kernel(int(v), params, rng)
    return out.reshape(arr.shape)


def clique_block_average_estimator(clique_vertices, N: int, D: int) -> Callable:
    """Oracle denoiser: average within the planted per-axis vertex blocks.

    For each axis j, the planted vertices falling in slab j (vertex range
    [j n1, (j+1) n1)) form one block and the rest of the axis the other;
    the returned callable block-averages its input on those rectangles.
    """
    n1, rem = divmod(N, D)
    if rem:
        raise ValueError("N must be divisible by D")
    clique = sorted(int(v) for v in clique_vertices)
    partitions = []
    for axis in range(D):
        members = [v - axis * n1 for v in clique if axis * n1 <= v < (axis + 1) * n1]
        others = [i for i in range(n1) if i not in set(members)]
        blocks = tuple(b for b in (tuple(others), tuple(members)) if b)
        partitions.append(OrderedPartition(blocks))

    def estimate(tensor: np.ndarray) -> np.ndarray:
        return block_average(tensor, partitions)

    return estimate


def da_test(
    graph: Hypergraph,
    K: int,
    estimator: Callable,
    params: RejectionKernelParams | None = None,
    rng: np.random.Generator | None = None,
) -> int:
    """Detection via adaptation: zoom, kernelize, denoise, threshold.

    Reads the hypergraph into a d-dimensional binary tensor (d = D,
    n1 = N / D), pushes every cell through the rejection kernel with the
    canonical parameters (unless overridden), applies ``estimator`` to the
    resulting tensor, and returns 1 iff the squared Euclidean norm of the
    estimate reaches ``rho^2 (K / (2d))^d / 4``.
    """
    d = graph.D
    n1, rem = divmod(graph.N, d)
    if rem:
        raise ValueError(f"N = {graph.N} is not divisible by D = {d}")
    if n1 < 2:
        raise ValueError("zoomed side length must be >= 2")
    if params is None:
        params = canonical_kernel_params(d, n1)
    if rng is None:
        rng = np.random.default_rng()
    bits = zoom_tensor(graph, d, n1)
    z = kernelize_tensor(bits, params, rng)
    theta = np.asarray(estimator(z), dtype=np.float64)
    k_tilde = K / (2.0 * d)
    threshold = params.rho ** 2 * k_tilde ** d / 4.0
    stat = float(np.sum(theta * theta))
    return 1 if stat >= threshold else 0


# --- text format -------------------------------------------------------------
#
# First line "N D"; one edge per line after that, as D sorted 0-based vertex
# indices; edge lines are sorted colexicographically.


def write_hypergraph(f: IO[str], graph: Hypergraph) -> None:
    f.write(f"{graph.N} {graph.D}\n")
    for edge in sorted(graph.edges, key=lambda e: tuple(reversed(e))):
        f.write(" ".join(str(v) for v in edge) + "\n")


def read_hypergraph(f: IO[str]) -> Hypergraph:
    lines = [ln for ln in (raw.strip() for raw in f.read().splitlines()) if ln]
    if not lines:
        raise ValueError("hypergraph text is empty")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError(f"bad hypergraph header {lines[0]!r}")
    N, D = int(head[0]), int(head[1])
    edges = set()
    for ln in lines[1:]:
        parts = tuple(int(v) for v in ln.split())
        if len(parts) != D:
            raise ValueError(f"edge line {ln!r} does not have {D} vertices")
        edges.add(parts)
    return Hypergraph(N=N, D=D, edges=frozenset(edges))
