"""Monte-Carlo risk engine, rate fitting, and adaptivity-ratio estimation.

Replicates run on derived counter-based streams, so results are identical
for a given config no matter how many workers execute them. The worker
count comes from the ``PERMISO_WORKERS`` environment variable (default:
machine parallelism).
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from ._validation import ConfigError
from .estimators import (
    borda_count_estimate,
    crl_estimate,
    global_lse_bruteforce,
    mirsky_partition_estimate,
    perm_projection_lse,
)
from .lattice import (
    LatticeShape,
    PermutationTuple,
    apply_permutations,
    derive_rng,
    empirical_sq_loss,
)
from .synth import IndifferenceSpec, base_indifference_tensor, random_monotone_tensor

__all__ = [
    "ExperimentConfig",
    "RiskRow",
    "RiskReport",
    "monte_carlo_risk",
    "rate_fit",
    "RateFit",
    "adaptivity_ratio",
    "parse_config",
    "parse_config_file",
    "with_overrides",
    "WORKERS_ENV_VAR",
]

WORKERS_ENV_VAR = "PERMISO_WORKERS"

METHODS = ("mp", "bc", "crl", "lse-oracle", "lse-brute", "identity")
TRUTH_FAMILIES = ("indifference", "random-monotone", "constant")


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation request: a method, a shape grid, and a truth family."""

    method: str
    grid: tuple
    truth: str = "random-monotone"
    blocks: tuple | None = None
    noise_sd: float = 1.0
    reps: int = 100
    seed: int = 0
    bounded: bool = False
    box_radius: float = 1.0
    scale: float = 1.0
    bound: float = 1.0
    out: str | None = None
    timing: bool = False

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.truth not in TRUTH_FAMILIES:
            raise ConfigError(f"unknown truth family {self.truth!r}; choose from {TRUTH_FAMILIES}")
        grid = tuple((int(d), int(n1)) for d, n1 in self.grid)
        object.__setattr__(self, "grid", grid)
        if not grid:
            raise ConfigError("grid must contain at least one (d, n1) point")
        for d, n1 in grid:
            LatticeShape(d, n1)  # validates ranges
        if self.blocks is not None:
            object.__setattr__(
                self, "blocks", tuple(tuple(int(k) for k in b) for b in self.blocks)
            )
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.noise_sd < 0:
            raise ConfigError("noise_sd must be nonnegative")
        if self.bounded and not self.box_radius > 0:
            raise ConfigError("box_radius must be positive when bounded")
        if self.truth == "indifference" and self.blocks is None:
            raise ConfigError("truth = indifference requires a blocks key")


@dataclass(frozen=True)
class RiskRow:
    method: str
    d: int
    n1: int
    n: int
    risk_mean: float
    risk_se: float
    reps: int
    seconds: float


@dataclass(frozen=True)
class RiskReport:
    rows: tuple

    CSV_HEADER = "method,d,n1,n,risk_mean,risk_se,reps,seconds"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.method},{r.d},{r.n1},{r.n},{r.risk_mean!r},{r.risk_se!r},"
                f"{r.reps},{r.seconds!r}"
            )
        return "\n".join(lines) + "\n"


def _indifference_spec(config: ExperimentConfig, shape: LatticeShape) -> IndifferenceSpec:
    blocks = config.blocks
    if len(blocks) == 1 and shape.d > 1:
        blocks = blocks * shape.d  # one axis spec given, reuse on every axis
    try:
        return IndifferenceSpec(shape, blocks)
    except ValueError as exc:
        raise ConfigError(f"blocks incompatible with grid point {shape}: {exc}") from exc


def _make_truth(config: ExperimentConfig, shape: LatticeShape, rng) -> np.ndarray:
    if config.truth == "constant":
        return np.zeros(shape.dims)
    if config.truth == "random-monotone":
        return random_monotone_tensor(shape, config.bound, rng)
    spec = _indifference_spec(config, shape)
    return config.scale * base_indifference_tensor(spec)


def _run_method(
    method: str,
    y: np.ndarray,
    true_perms: PermutationTuple,
    rng,
    box_radius: float | None,
):
    if method == "mp":
        return mirsky_partition_estimate(y, box_radius).theta_hat
    if method == "bc":
        return borda_count_estimate(y, box_radius).theta_hat
    if method == "crl":
        return crl_estimate(y, rng, box_radius).theta_hat
    if method == "lse-oracle":
        return perm_projection_lse(y, true_perms, box_radius)
    if method == "lse-brute":
        return global_lse_bruteforce(y, box_radius).theta_hat
    if method == "identity":
        return y
    raise ConfigError(f"unknown method {method!r}")


def _replicate_risk(config: ExperimentConfig, grid_index: int, rep: int) -> float:
    """One replicate's empirical loss; every randomness source gets its own stream."""
    d, n1 = config.grid[grid_index]
    shape = LatticeShape(d, n1)
    rng_truth = derive_rng(config.seed, grid_index, rep, 0)
    rng_perms = derive_rng(config.seed, grid_index, rep, 1)
    rng_noise = derive_rng(config.seed, grid_index, rep, 2)
    rng_est = derive_rng(config.seed, grid_index, rep, 3)
    truth = _make_truth(config, shape, rng_truth)
    perms = PermutationTuple.random(shape.d, shape.n1, rng_perms)
    theta_star = apply_permutations(truth, perms)
    y = theta_star + config.noise_sd * rng_noise.standard_normal(shape.dims)
    box = config.box_radius if config.bounded else None
    theta_hat = _run_method(config.method, y, perms, rng_est, box)
    return empirical_sq_loss(theta_hat, theta_star)


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR)
    if raw is None:
        return os.cpu_count() or 1
    try:
        count = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer, got {raw!r}") from exc
    if count < 1:
        raise ConfigError(f"{WORKERS_ENV_VAR} must be >= 1, got {count}")
    return count


def monte_carlo_risk(config: ExperimentConfig) -> RiskReport:
    """Mean empirical loss and its standard error at every grid point."""
    workers = _worker_count()
    rows = []
    for g in range(len(config.grid)):
        d, n1 = config.grid[g]
        started = time.perf_counter()
        args = [(config, g, r) for r in range(config.reps)]
        if workers > 1 and config.reps > 1:
            with ProcessPoolExecutor(max_workers=min(workers, config.reps)) as pool:
                risks = list(
                    pool.map(
                        _replicate_risk,
                        *zip(*args),
                        chunksize=max(1, config.reps // (4 * workers)),
                    )
                )
        else:
            risks = [_replicate_risk(*a) for a in args]
        elapsed = time.perf_counter() - started
        mean = math.fsum(risks) / config.reps
        if config.reps > 1:
            var = math.fsum((x - mean) ** 2 for x in risks) / (config.reps - 1)
            se = math.sqrt(var / config.reps)
        else:
            se = 0.0
        rows.append(
            RiskRow(
                method=config.method,
                d=d,
                n1=n1,
                n=n1 ** d,
                risk_mean=mean,
                risk_se=se,
                reps=config.reps,
                seconds=elapsed if config.timing else 0.0,
            )
        )
    return RiskReport(rows=tuple(rows))


class RateFit(NamedTuple):
    slope: float
    intercept: float


def rate_fit(points: Sequence) -> RateFit:
    """Ordinary least squares of log(risk) on log(n)."""
    pts = [(float(n), float(risk)) for n, risk in points]
    if len(pts) < 2:
        raise ValueError("rate_fit needs at least two points")
    if any(n <= 0 or risk <= 0 for n, risk in pts):
        raise ValueError("rate_fit needs strictly positive sizes and risks")
    xs = np.log([n for n, _ in pts])
    ys = np.log([r for _, r in pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    return RateFit(slope=float(slope), intercept=float(intercept))


def adaptivity_ratio(report: RiskReport, specs: Sequence[IndifferenceSpec]) -> float:
    """Largest measured risk relative to the structured-class adaptation scale.

    The per-spec scale is ``(s + (n1 - k*) log n) / n`` with s the total
    block count and k* the smallest over axes of the largest block size.
    This is a Monte-Carlo surrogate: risks are averages over sampled truths,
    so the reported value lower-bounds the worst case over each class.
    """
    specs = tuple(specs)
    if len(specs) != len(report.rows):
        raise ValueError(f"got {len(report.rows)} rows but {len(specs)} specs")
    best = 0.0
    for row, spec in zip(report.rows, specs):
        if (spec.shape.d, spec.shape.n1) != (row.d, row.n1):
            raise ValueError(
                f"spec shape {spec.shape} does not match report row ({row.d}, {row.n1})"
            )
        n = spec.shape.n
        scale = (spec.total_blocks + (spec.shape.n1 - spec.min_max_block) * math.log(n)) / n
        best = max(best, row.risk_mean / scale)
    return best


# --- config files ------------------------------------------------------------
#
# One "key = value" per line; blank lines and lines starting with # are
# skipped. Keys: method, grid, truth, blocks, noise_sd, reps, seed, bounded,
# box_radius, scale, bound, out, timing. grid is space-separated DxN1 tokens
# ("2x4 2x8"); blocks is per-axis size lists joined by | ("8 8 | 8 8").

_BOOL_KEYS = {"bounded", "timing"}
_INT_KEYS = {"reps", "seed"}
_FLOAT_KEYS = {"noise_sd", "box_radius", "scale", "bound"}
_STR_KEYS = {"method", "truth", "out"}


def _parse_grid(raw: str):
    points = []
    for token in raw.split():
        parts = token.lower().split("x")
        if len(parts) != 2:
            raise ConfigError(f"bad grid token {token!r}; expected DxN1 like 2x8")
        try:
            points.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"bad grid token {token!r}") from exc
    if not points:
        raise ConfigError("grid has no points")
    return tuple(points)


def _parse_blocks(raw: str):
    axes = []
    for part in raw.split("|"):
        try:
            sizes = tuple(int(tok) for tok in part.split())
        except ValueError as exc:
            raise ConfigError(f"bad blocks segment {part!r}") from exc
        if not sizes:
            raise ConfigError("empty axis in blocks")
        axes.append(sizes)
    return tuple(axes)


def parse_config(text: str) -> ExperimentConfig:
    fields: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in fields:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key == "grid":
            fields["grid"] = _parse_grid(value)
        elif key == "blocks":
            fields["blocks"] = _parse_blocks(value)
        elif key in _BOOL_KEYS:
            low = value.lower()
            if low not in ("true", "false"):
                raise ConfigError(f"line {lineno}: {key} must be true or false")
            fields[key] = low == "true"
        elif key in _INT_KEYS:
            try:
                fields[key] = int(value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {key} must be an integer") from exc
        elif key in _FLOAT_KEYS:
            try:
                fields[key] = float(value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {key} must be a number") from exc
        elif key in _STR_KEYS:
            fields[key] = value
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if "method" not in fields:
        raise ConfigError("config is missing the method key")
    if "grid" not in fields:
        raise ConfigError("config is missing the grid key")
    return ExperimentConfig(**fields)


def parse_config_file(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_config(f.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc


def with_overrides(config: ExperimentConfig, **kwargs) -> ExperimentConfig:
    return replace(config, **kwargs)
