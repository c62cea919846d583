"""Balanced tensors on the uniform lattice: shapes, permutations, losses, I/O.

Tensors are plain C-order ``numpy.ndarray`` values of shape ``(n1,) * d``.
Axis and lattice indices are 0-based throughout the Python API; the text
formats written by this module are 0-based as well and say so in the README.
Functions never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from ._validation import as_float_tensor, check_balanced, check_same_shape

__all__ = [
    "LatticeShape",
    "PermutationTuple",
    "apply_permutations",
    "empirical_sq_loss",
    "linf_distance",
    "derive_rng",
    "read_tensor",
    "write_tensor",
    "format_tensor",
    "parse_tensor",
]


@dataclass(frozen=True)
class LatticeShape:
    """Order and side length of a balanced lattice; ``n = n1 ** d`` cells."""

    d: int
    n1: int

    def __post_init__(self) -> None:
        if not (isinstance(self.d, (int, np.integer)) and self.d >= 1):
            raise ValueError(f"order d must be an integer >= 1, got {self.d!r}")
        if not (isinstance(self.n1, (int, np.integer)) and self.n1 >= 2):
            raise ValueError(f"side length n1 must be an integer >= 2, got {self.n1!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "n1", int(self.n1))
        # overflow guard: n must fit the platform index type
        if self.n1 ** self.d > np.iinfo(np.intp).max:
            raise ValueError(f"lattice with n1={self.n1}, d={self.d} is too large to index")

    @property
    def n(self) -> int:
        return self.n1 ** self.d

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.n1,) * self.d

    @classmethod
    def of(cls, tensor: np.ndarray) -> "LatticeShape":
        """Read the shape off a balanced tensor, validating balance."""
        check_balanced(tensor)
        return cls(tensor.ndim, tensor.shape[0])


def _check_perm_array(p: np.ndarray, n1: int) -> np.ndarray:
    p = np.asarray(p, dtype=np.intp)
    if p.shape != (n1,):
        raise ValueError(f"permutation has length {p.shape}, expected ({n1},)")
    seen = np.zeros(n1, dtype=bool)
    if p.min(initial=0) < 0 or p.max(initial=0) >= n1:
        raise ValueError("permutation entries out of range")
    seen[p] = True
    if not seen.all():
        raise ValueError("permutation is not a bijection on range(n1)")
    out = p.copy()
    out.flags.writeable = False
    return out


class PermutationTuple:
    """One permutation of ``range(n1)`` per tensor axis.

    Each permutation is stored as an index array ``p`` read as the function
    ``i -> p[i]``. Applying the tuple to a tensor relabels every axis:
    ``apply_permutations(T, P)[i1, ..., id] = T[p1[i1], ..., pd[id]]``.
    """

    __slots__ = ("perms",)

    def __init__(self, perms: Iterable[Sequence[int]]):
        arrays = [np.asarray(p, dtype=np.intp) for p in perms]
        if not arrays:
            raise ValueError("need at least one permutation")
        if arrays[0].ndim != 1 or arrays[0].shape[0] < 1:
            raise ValueError("each permutation must be a nonempty 1-D index array")
        n1 = arrays[0].shape[0]
        self.perms: tuple[np.ndarray, ...] = tuple(
            _check_perm_array(p, n1) for p in arrays
        )

    @property
    def d(self) -> int:
        return len(self.perms)

    @property
    def n1(self) -> int:
        return self.perms[0].shape[0]

    @classmethod
    def identity(cls, d: int, n1: int) -> "PermutationTuple":
        return cls([np.arange(n1)] * d)

    @classmethod
    def random(cls, d: int, n1: int, rng: np.random.Generator) -> "PermutationTuple":
        return cls([rng.permutation(n1) for _ in range(d)])

    def inverse(self) -> "PermutationTuple":
        # argsort of a bijection array is its functional inverse
        return PermutationTuple([np.argsort(p) for p in self.perms])

    def compose(self, other: "PermutationTuple") -> "PermutationTuple":
        """Per-axis composition ``(self o other)(i) = self[other[i]]``."""
        if (self.d, self.n1) != (other.d, other.n1):
            raise ValueError("permutation tuples differ in shape")
        return PermutationTuple([p[q] for p, q in zip(self.perms, other.perms)])

    def to_lists(self) -> list[list[int]]:
        return [p.tolist() for p in self.perms]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PermutationTuple):
            return NotImplemented
        return self.d == other.d and all(
            np.array_equal(p, q) for p, q in zip(self.perms, other.perms)
        )

    def __hash__(self) -> int:
        return hash(tuple(tuple(p.tolist()) for p in self.perms))

    def __repr__(self) -> str:
        return f"PermutationTuple({self.to_lists()})"


def apply_permutations(tensor: np.ndarray, perms: PermutationTuple) -> np.ndarray:
    """Relabel every axis: output ``O[i1,...,id] = T[p1[i1],...,pd[id]]``."""
    t = as_float_tensor(tensor)
    check_balanced(t)
    if perms.d != t.ndim or perms.n1 != t.shape[0]:
        raise ValueError(
            f"permutation tuple (d={perms.d}, n1={perms.n1}) does not match "
            f"tensor shape {t.shape}"
        )
    return np.ascontiguousarray(t[np.ix_(*perms.perms)])


def empirical_sq_loss(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared entrywise difference, ``(1/n) * sum((a - b)**2)``."""
    ta = as_float_tensor(a, name="first tensor")
    tb = as_float_tensor(b, name="second tensor")
    check_same_shape(ta, tb)
    diff = ta - tb
    return float(np.mean(diff * diff))


def linf_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest absolute entrywise difference."""
    ta = as_float_tensor(a, name="first tensor")
    tb = as_float_tensor(b, name="second tensor")
    check_same_shape(ta, tb)
    return float(np.max(np.abs(ta - tb)))


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Counter-based random stream for (seed, path), disjoint across paths.

    Built on Philox so that replicate streams derived from one base seed
    never overlap; identical (seed, path) pairs replay identical streams.
    """
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


# --- text format ------------------------------------------------------------
#
# First line: "d n1". Then the n = n1**d values in row-major order (last axis
# fastest), one axis-(d-1) fiber of n1 values per line, 17 significant digits.
# The reader accepts any whitespace layout after the header line.


def format_tensor(tensor: np.ndarray) -> str:
    t = as_float_tensor(tensor)
    check_balanced(t)
    shape = LatticeShape.of(t)
    lines = [f"{shape.d} {shape.n1}"]
    flat = t.reshape(-1, shape.n1)
    for row in flat:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def parse_tensor(text: str) -> np.ndarray:
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("tensor text is missing its 'd n1' header")
    try:
        d, n1 = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise ValueError(f"bad tensor header {tokens[:2]!r}") from exc
    shape = LatticeShape(d, n1)
    values = tokens[2:]
    if len(values) != shape.n:
        raise ValueError(f"expected {shape.n} values, found {len(values)}")
    arr = np.array([float(v) for v in values], dtype=np.float64).reshape(shape.dims)
    return as_float_tensor(arr)


def write_tensor(f: IO[str], tensor: np.ndarray) -> None:
    f.write(format_tensor(tensor))


def read_tensor(f: IO[str]) -> np.ndarray:
    return parse_tensor(f.read())
