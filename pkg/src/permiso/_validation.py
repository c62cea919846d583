"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

__all__ = [
    "ConfigError",
    "SizeCapExceeded",
    "as_float_tensor",
    "check_balanced",
    "check_axis",
    "check_same_shape",
]


class ConfigError(ValueError):
    """Raised for malformed experiment configs or CLI parameters."""


class SizeCapExceeded(RuntimeError):
    """Raised when an exhaustive routine is asked to exceed its size cap."""


def as_float_tensor(values, *, name: str = "tensor") -> np.ndarray:
    """Coerce to a C-contiguous float64 array with finite entries.

    Accepts nested sequences or ndarrays of any dimension. The balanced
    (equal side length) requirement is checked by the callers that need it.
    """
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim == 0:
        raise ValueError(f"{name} must have at least one axis")
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_balanced(arr: np.ndarray, *, name: str = "tensor") -> None:
    """Require every axis of ``arr`` to share one side length >= 2."""
    sides = set(arr.shape)
    if len(sides) != 1:
        raise ValueError(f"{name} is not balanced: shape {arr.shape}")
    if arr.shape[0] < 2:
        raise ValueError(f"{name} side length must be >= 2, got {arr.shape[0]}")


def check_axis(axis: int, ndim: int) -> int:
    """Validate a 0-based axis index against the tensor order."""
    if not isinstance(axis, (int, np.integer)):
        raise TypeError(f"axis must be an integer, got {type(axis).__name__}")
    if not 0 <= axis < ndim:
        raise ValueError(f"axis {axis} out of range for a tensor of order {ndim}")
    return int(axis)


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
