"""Denoising monotone tensors observed under unknown axis-wise shuffles.

Observations sit on a balanced d-dimensional lattice; the signal is
coordinate-wise nondecreasing after some unknown relabeling of each axis.
The package provides the estimators, the projection solvers behind them,
synthetic instance generators, a Monte-Carlo risk harness, and the
hypergraph reduction used to probe computational hardness.
"""

from ._validation import ConfigError, SizeCapExceeded
from .estimators import (
    BordaCountEstimator,
    CRLEstimator,
    EstimateResult,
    MirskyPartitionEstimator,
    PairwiseStats,
    borda_count_estimate,
    crl_estimate,
    global_lse_bruteforce,
    mirsky_partition_estimate,
    pairwise_stats,
    perm_projection_lse,
    permutation_lemma_check,
    scores,
)
from .harness import (
    ExperimentConfig,
    RateFit,
    RiskReport,
    RiskRow,
    WORKERS_ENV_VAR,
    adaptivity_ratio,
    monte_carlo_risk,
    parse_config,
    parse_config_file,
    rate_fit,
    with_overrides,
)
from .lattice import (
    LatticeShape,
    PermutationTuple,
    apply_permutations,
    derive_rng,
    empirical_sq_loss,
    format_tensor,
    linf_distance,
    parse_tensor,
    read_tensor,
    write_tensor,
)
from .orders import (
    ComparisonDigraph,
    OrderedPartition,
    build_comparison_graph,
    faithful_permutation,
    has_cycle,
    max_threshold,
    mirsky_decompose,
    sum_threshold,
)
from .reduction import (
    Hypergraph,
    RejectionKernelParams,
    canonical_iteration_cap,
    canonical_kernel_params,
    canonical_rho,
    clique_block_average_estimator,
    da_test,
    kernelize_tensor,
    read_hypergraph,
    rejection_kernel,
    sample_null,
    sample_planted,
    sample_planted_with_vertices,
    write_hypergraph,
    zoom_tensor,
)
from .solvers import (
    block_average,
    block_isotonic_project,
    collapse_block_means,
    isotonic_minmax_oracle,
    isotonic_project,
    lift_block_tensor,
    pava,
)
from .synth import (
    IndifferenceSpec,
    Instance,
    base_indifference_tensor,
    make_instance,
    random_monotone_tensor,
    read_instance,
    write_instance,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "SizeCapExceeded",
    "LatticeShape",
    "PermutationTuple",
    "apply_permutations",
    "empirical_sq_loss",
    "linf_distance",
    "derive_rng",
    "format_tensor",
    "parse_tensor",
    "write_tensor",
    "read_tensor",
    "OrderedPartition",
    "ComparisonDigraph",
    "mirsky_decompose",
    "has_cycle",
    "faithful_permutation",
    "sum_threshold",
    "max_threshold",
    "build_comparison_graph",
    "pava",
    "isotonic_project",
    "isotonic_minmax_oracle",
    "collapse_block_means",
    "lift_block_tensor",
    "block_average",
    "block_isotonic_project",
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
    "IndifferenceSpec",
    "base_indifference_tensor",
    "random_monotone_tensor",
    "Instance",
    "make_instance",
    "write_instance",
    "read_instance",
    "Hypergraph",
    "sample_null",
    "sample_planted",
    "sample_planted_with_vertices",
    "zoom_tensor",
    "RejectionKernelParams",
    "canonical_rho",
    "canonical_iteration_cap",
    "canonical_kernel_params",
    "rejection_kernel",
    "kernelize_tensor",
    "clique_block_average_estimator",
    "da_test",
    "write_hypergraph",
    "read_hypergraph",
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
