"""Isotonic projections: PAVA, lattice Dykstra, min-max oracle, block ops.

Everything here works on arbitrary rectangular float arrays; the balanced
restriction is enforced upstream where it matters. ``weights=None`` means
unit weights throughout.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ._validation import SizeCapExceeded, as_float_tensor
from .orders import OrderedPartition

__all__ = [
    "pava",
    "isotonic_project",
    "isotonic_minmax_oracle",
    "block_average",
    "block_isotonic_project",
    "collapse_block_means",
    "lift_block_tensor",
    "DEFAULT_TOL",
    "DEFAULT_MAX_SWEEPS",
    "DEFAULT_ORACLE_CAP",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 100_000
DEFAULT_ORACLE_CAP = 9


def _check_weights(weights, shape) -> np.ndarray:
    if weights is None:
        return np.ones(shape, dtype=np.float64)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.shape != tuple(shape):
        raise ValueError(f"weights shape {w.shape} does not match values {tuple(shape)}")
    if not np.isfinite(w).all() or np.any(w <= 0.0):
        raise ValueError("weights must be finite and strictly positive")
    return w


def _pava_row(vals: list, wts: list) -> list:
    """Weighted pooling on one fiber; returns the nondecreasing projection."""
    means: list[float] = []
    wsums: list[float] = []
    counts: list[int] = []
    for v, w in zip(vals, wts):
        c = 1
        while means and means[-1] > v:
            pm = means.pop()
            pw = wsums.pop()
            pc = counts.pop()
            v = (pw * pm + w * v) / (pw + w)
            w = pw + w
            c = pc + c
        means.append(v)
        wsums.append(w)
        counts.append(c)
    out: list[float] = []
    for m, c in zip(means, counts):
        out.extend([m] * c)
    return out


def pava(values, weights=None) -> np.ndarray:
    """Weighted least-squares projection of a sequence onto nondecreasing ones.

    Parameters
    ----------
    values : 1-D array-like
    weights : 1-D array-like of positive floats, optional

    Returns
    -------
    ndarray, nondecreasing, with the same weighted mean as the input.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("pava expects a nonempty 1-D sequence")
    if not np.isfinite(v).all():
        raise ValueError("pava input contains non-finite entries")
    w = _check_weights(weights, v.shape)
    return np.asarray(_pava_row(v.tolist(), w.tolist()), dtype=np.float64)


def _axis_pava_pass(x: np.ndarray, w_rows: list, axis: int) -> np.ndarray:
    """Project onto {nondecreasing along ``axis``}: exact PAVA on every fiber."""
    # .copy() rather than ascontiguousarray: the latter aliases x when axis is
    # already last, and the in-place row writes below would corrupt the caller
    moved = np.moveaxis(x, axis, -1).copy()
    length = moved.shape[-1]
    rows = moved.reshape(-1, length)
    for i in range(rows.shape[0]):
        rows[i] = _pava_row(rows[i].tolist(), w_rows[i])
    return np.ascontiguousarray(np.moveaxis(moved, -1, axis))


def isotonic_project(
    values,
    weights=None,
    box_radius: float | None = None,
    *,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> np.ndarray:
    """Weighted L2 projection onto coordinate-wise nondecreasing tensors.

    When ``box_radius`` is given the target set is intersected with the
    sup-norm ball of that radius. Computed by cyclic Dykstra passes, one
    component per axis (exact weighted PAVA on every 1-D fiber) plus a
    clamp component for the box; each component projection is exact, so the
    iteration converges to the true projection onto the intersection. Sweeps
    stop once consecutive iterates differ by less than ``tol`` in sup norm.
    The output is clamped to the box at the end, so any box violation left
    by the final sweep (below tolerance) is removed exactly.
    """
    x = as_float_tensor(values, name="values")
    w = _check_weights(weights, x.shape)
    if box_radius is not None:
        box_radius = float(box_radius)
        if not (box_radius > 0.0 and math.isfinite(box_radius)):
            raise ValueError(f"box radius must be positive and finite, got {box_radius}")

    if x.ndim == 1 and box_radius is None:
        return pava(x, w)

    # per-axis fiber weights, flattened once
    axis_weights = []
    for a in range(x.ndim):
        wm = np.ascontiguousarray(np.moveaxis(w, a, -1))
        axis_weights.append([row.tolist() for row in wm.reshape(-1, wm.shape[-1])])

    n_components = x.ndim + (1 if box_radius is not None else 0)
    increments = [np.zeros_like(x) for _ in range(n_components)]
    for _ in range(max_sweeps):
        previous = x
        for k in range(n_components):
            shifted = x + increments[k]
            if k < x.ndim:
                projected = _axis_pava_pass(shifted, axis_weights[k], k)
            else:
                projected = np.clip(shifted, -box_radius, box_radius)
            increments[k] = shifted - projected
            x = projected
        if float(np.max(np.abs(x - previous))) < tol:
            break
    if box_radius is not None:
        x = np.clip(x, -box_radius, box_radius)
    return x


def _lower_set_masks(dims: Sequence[int]) -> list:
    """Bitmasks of the down-closed cell sets of a rectangular lattice."""
    n = int(np.prod(dims))
    strides = []
    acc = 1
    for size in reversed(dims):
        strides.append(acc)
        acc *= size
    strides.reverse()

    # immediate predecessors of each cell in the coordinate order
    preds: list[list[int]] = []
    for flat in range(n):
        rest, coord_preds = flat, []
        coords = []
        for size in reversed(dims):
            coords.append(rest % size)
            rest //= size
        coords.reverse()
        for a, c in enumerate(coords):
            if c > 0:
                coord_preds.append(flat - strides[a])
        preds.append(coord_preds)

    lowers = []
    for mask in range(1 << n):
        ok = True
        m = mask
        while m:
            low = m & (-m)
            cell = low.bit_length() - 1
            for p in preds[cell]:
                if not (mask >> p) & 1:
                    ok = False
                    break
            if not ok:
                break
            m ^= low
        if ok:
            lowers.append(mask)
    return lowers


def isotonic_minmax_oracle(values, weights=None, *, cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """Exact isotonic projection by enumerating lower and upper cell sets.

    Evaluates, at every cell x, the smallest over lower sets L containing x
    of the largest over upper sets U containing x of the weighted mean on
    L & U. Exponential in the cell count; refuses inputs above ``cap``.
    """
    x = as_float_tensor(values, name="values")
    if x.size > cap:
        raise SizeCapExceeded(f"oracle cap is {cap} cells, input has {x.size}")
    w = _check_weights(weights, x.shape)
    n = x.size
    flat_v = x.reshape(-1)
    flat_w = w.reshape(-1)

    full = (1 << n) - 1
    wsum = np.zeros(1 << n)
    wvsum = np.zeros(1 << n)
    for mask in range(1, 1 << n):
        low = mask & (-mask)
        cell = low.bit_length() - 1
        wsum[mask] = wsum[mask ^ low] + flat_w[cell]
        wvsum[mask] = wvsum[mask ^ low] + flat_w[cell] * flat_v[cell]

    lowers = _lower_set_masks(x.shape)
    uppers = [full ^ m for m in lowers]

    out = np.empty(n)
    for cell in range(n):
        bit = 1 << cell
        best = math.inf
        for lo in lowers:
            if not lo & bit:
                continue
            worst = -math.inf
            for up in uppers:
                if not up & bit:
                    continue
                inter = lo & up
                mean = wvsum[inter] / wsum[inter]
                if mean > worst:
                    worst = mean
            if worst < best:
                best = worst
        out[cell] = best
    return out.reshape(x.shape)


def _check_partitions(shape: Sequence[int], partitions: Sequence[OrderedPartition]):
    partitions = tuple(partitions)
    if len(partitions) != len(shape):
        raise ValueError(f"need {len(shape)} partitions, got {len(partitions)}")
    for a, (size, part) in enumerate(zip(shape, partitions)):
        if not isinstance(part, OrderedPartition):
            raise TypeError(f"partition for axis {a} is not an OrderedPartition")
        if part.n != size:
            raise ValueError(f"partition for axis {a} covers {part.n} indices, axis has {size}")
    return partitions


def collapse_block_means(values, partitions: Sequence[OrderedPartition]):
    """Per-block means and cell counts on the block lattice.

    Returns ``(means, counts)`` with one entry per block combination; block
    means are accumulated with compensated summation.
    """
    x = as_float_tensor(values, name="values")
    partitions = _check_partitions(x.shape, partitions)
    sizes = tuple(p.card for p in partitions)
    means = np.empty(sizes)
    counts = np.empty(sizes)
    for combo in np.ndindex(*sizes):
        blocks = [list(partitions[a].blocks[b]) for a, b in enumerate(combo)]
        cells = x[np.ix_(*blocks)]
        means[combo] = math.fsum(cells.reshape(-1).tolist()) / cells.size
        counts[combo] = cells.size
    return means, counts


def lift_block_tensor(block_values, partitions: Sequence[OrderedPartition]) -> np.ndarray:
    """Expand a block-lattice tensor (one entry per block) to the full lattice."""
    b = as_float_tensor(block_values, name="block values")
    partitions = tuple(partitions)
    if len(partitions) != b.ndim:
        raise ValueError(f"need {b.ndim} partitions, got {len(partitions)}")
    for a, part in enumerate(partitions):
        if part.card != b.shape[a]:
            raise ValueError(
                f"axis {a}: block tensor has {b.shape[a]} entries but the "
                f"partition has {part.card} blocks"
            )
    ranks = [p.rank() for p in partitions]
    return np.ascontiguousarray(b[np.ix_(*ranks)])


def block_average(values, partitions: Sequence[OrderedPartition]) -> np.ndarray:
    """Replace every cell by the mean of its hyper-rectangular block."""
    x = as_float_tensor(values, name="values")
    partitions = _check_partitions(x.shape, partitions)
    means, _ = collapse_block_means(x, partitions)
    ranks = [p.rank() for p in partitions]
    return np.ascontiguousarray(means[np.ix_(*ranks)])


def block_isotonic_project(
    values,
    partitions: Sequence[OrderedPartition],
    box_radius: float | None = None,
    *,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> np.ndarray:
    """Project onto tensors constant on blocks and monotone in block rank.

    Composition route: average within blocks, collapse to the block lattice
    weighted by block cell counts, run the weighted isotonic projection
    there, and lift the result back to the full lattice.
    """
    x = as_float_tensor(values, name="values")
    partitions = _check_partitions(x.shape, partitions)
    means, counts = collapse_block_means(x, partitions)
    if means.size == 1:
        projected = means if box_radius is None else np.clip(means, -box_radius, box_radius)
    else:
        projected = isotonic_project(
            means, counts, box_radius, tol=tol, max_sweeps=max_sweeps
        )
    ranks = [p.rank() for p in partitions]
    return np.ascontiguousarray(projected[np.ix_(*ranks)])
