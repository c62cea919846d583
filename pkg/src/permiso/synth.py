"""Ground-truth generators, noise injection, and instance serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from ._validation import as_float_tensor, check_balanced
from .lattice import (
    LatticeShape,
    PermutationTuple,
    apply_permutations,
    format_tensor,
    parse_tensor,
)
from .orders import OrderedPartition
from .solvers import lift_block_tensor

__all__ = [
    "IndifferenceSpec",
    "Instance",
    "base_indifference_tensor",
    "random_monotone_tensor",
    "make_instance",
    "write_instance",
    "read_instance",
]


@dataclass(frozen=True)
class IndifferenceSpec:
    """Per-axis block sizes describing which indices behave identically.

    ``sizes[j]`` lists the block sizes along axis j, summing to the side
    length; blocks are the consecutive index intervals of those sizes.
    """

    shape: LatticeShape
    sizes: tuple

    def __post_init__(self) -> None:
        sizes = tuple(tuple(int(k) for k in axis_sizes) for axis_sizes in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if len(sizes) != self.shape.d:
            raise ValueError(f"need {self.shape.d} per-axis size tuples, got {len(sizes)}")
        for j, axis_sizes in enumerate(sizes):
            if not axis_sizes or any(k < 1 for k in axis_sizes):
                raise ValueError(f"axis {j}: block sizes must be >= 1")
            if sum(axis_sizes) != self.shape.n1:
                raise ValueError(
                    f"axis {j}: block sizes sum to {sum(axis_sizes)}, expected {self.shape.n1}"
                )

    @property
    def block_counts(self) -> tuple:
        """Number of blocks per axis (s_1, ..., s_d)."""
        return tuple(len(axis_sizes) for axis_sizes in self.sizes)

    @property
    def total_blocks(self) -> int:
        out = 1
        for c in self.block_counts:
            out *= c
        return out

    @property
    def min_max_block(self) -> int:
        """Smallest over axes of the largest block size (k*)."""
        return min(max(axis_sizes) for axis_sizes in self.sizes)

    def partitions(self) -> tuple:
        """The consecutive-interval ordered partition of every axis."""
        return tuple(OrderedPartition.from_interval_sizes(s) for s in self.sizes)


def base_indifference_tensor(spec: IndifferenceSpec, block_values=None) -> np.ndarray:
    """Monotone block tensor: value ``sum of block coordinates`` by default.

    ``block_values`` may supply any coordinate-wise nondecreasing tensor on
    the block lattice; each value is then lifted to its hyper-rectangle.
    """
    counts = spec.block_counts
    if block_values is None:
        grids = np.indices(counts, dtype=np.float64)
        block_values = grids.sum(axis=0)
    else:
        block_values = as_float_tensor(block_values, name="block values")
        if block_values.shape != counts:
            raise ValueError(
                f"block values shape {block_values.shape} does not match block counts {counts}"
            )
        for a in range(block_values.ndim):
            if np.any(np.diff(block_values, axis=a) < 0):
                raise ValueError("block values must be nondecreasing along every axis")
    return lift_block_tensor(block_values, spec.partitions())


def random_monotone_tensor(
    shape: LatticeShape, bound: float, rng: np.random.Generator
) -> np.ndarray:
    """Random coordinate-wise nondecreasing tensor with entries in [-bound, bound].

    Draws iid unit-exponential increments on every cell, accumulates them
    along every axis in turn, and affinely rescales the result onto the box,
    so the smallest entry sits at -bound and the largest at +bound.
    """
    bound = float(bound)
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    if bound == 0.0:
        return np.zeros(shape.dims)
    cumulative = rng.exponential(1.0, shape.dims)
    for axis in range(shape.d):
        cumulative = np.cumsum(cumulative, axis=axis)
    lo = float(cumulative.min())
    hi = float(cumulative.max())
    if hi == lo:
        return np.zeros(shape.dims)
    return (2.0 * bound) * (cumulative - lo) / (hi - lo) - bound


@dataclass(frozen=True)
class Instance:
    """One synthetic observation: permuted truth plus Gaussian noise."""

    theta_star: np.ndarray
    Y: np.ndarray
    true_perms: PermutationTuple
    spec: IndifferenceSpec | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        self.theta_star.flags.writeable = False
        self.Y.flags.writeable = False


def make_instance(
    truth,
    perms,
    noise_sd: float,
    rng: np.random.Generator,
    *,
    spec: IndifferenceSpec | None = None,
    seed: int | None = None,
) -> Instance:
    """Permute a monotone truth tensor and add iid Gaussian noise.

    ``perms`` is a PermutationTuple or the string ``"random"``; the random
    tuple (when requested) and the noise are both drawn from ``rng``.
    """
    t = as_float_tensor(truth, name="truth")
    check_balanced(t, name="truth")
    shape = LatticeShape.of(t)
    if isinstance(perms, str):
        if perms != "random":
            raise ValueError(f"perms must be a PermutationTuple or 'random', got {perms!r}")
        perms = PermutationTuple.random(shape.d, shape.n1, rng)
    noise_sd = float(noise_sd)
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    theta_star = apply_permutations(t, perms)
    y = theta_star + noise_sd * rng.standard_normal(shape.dims)
    return Instance(theta_star=theta_star, Y=y, true_perms=perms, spec=spec, seed=seed)


# --- serialization -----------------------------------------------------------
#
# Line 1: a JSON header {"perms": [[...], ...], "spec": [[...], ...] | null,
# "seed": int | null} with 0-based permutation arrays. Then two tensor
# blocks in the text format: theta_star first, Y second.


def write_instance(f: IO[str], instance: Instance) -> None:
    header = {
        "perms": instance.true_perms.to_lists(),
        "spec": [list(s) for s in instance.spec.sizes] if instance.spec else None,
        "seed": instance.seed,
    }
    f.write(json.dumps(header, separators=(", ", ": ")) + "\n")
    f.write(format_tensor(instance.theta_star))
    f.write(format_tensor(instance.Y))


def read_instance(f: IO[str]) -> Instance:
    text = f.read()
    newline = text.find("\n")
    if newline < 0:
        raise ValueError("instance text is missing its header line")
    header = json.loads(text[:newline])
    body = text[newline + 1 :].split()
    if len(body) < 2:
        raise ValueError("instance text is missing its tensor blocks")
    d, n1 = int(body[0]), int(body[1])
    n = n1 ** d
    first = " ".join(body[: 2 + n])
    second = " ".join(body[2 + n :])
    theta_star = parse_tensor(first)
    y = parse_tensor(second)
    perms = PermutationTuple(header["perms"])
    spec = None
    if header.get("spec") is not None:
        spec = IndifferenceSpec(LatticeShape(d, n1), tuple(tuple(s) for s in header["spec"]))
    return Instance(
        theta_star=theta_star,
        Y=y,
        true_perms=perms,
        spec=spec,
        seed=header.get("seed"),
    )
