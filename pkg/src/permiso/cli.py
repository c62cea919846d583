"""Command-line entry points.

Exit codes: 0 success, 1 oracle-check suite failure, 2 bad usage or config,
3 a size-capped routine was asked to exceed its cap.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from ._validation import ConfigError, SizeCapExceeded
from .checks import run_oracle_checks
from .estimators import (
    borda_count_estimate,
    crl_estimate,
    global_lse_bruteforce,
    mirsky_partition_estimate,
)
from .harness import monte_carlo_risk, parse_config_file, with_overrides
from .lattice import derive_rng, read_tensor, write_tensor
from .reduction import (
    clique_block_average_estimator,
    da_test,
    sample_null,
    sample_planted_with_vertices,
    write_hypergraph,
)

__all__ = ["main", "build_parser"]

ESTIMATE_METHODS = ("mp", "bc", "crl", "lse-brute", "identity")
REDUCE_METHODS = ("mp", "bc", "crl", "oracle", "zero")


def _read_tensor_file(path: str) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return read_tensor(f)
    except OSError as exc:
        raise ConfigError(f"cannot read {path!r}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad tensor file {path!r}: {exc}") from exc


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path!r}: {exc}") from exc


def _cmd_estimate(args: argparse.Namespace) -> int:
    y = _read_tensor_file(args.infile)
    box = args.box_radius if args.bounded else None
    rng = derive_rng(args.seed)
    try:
        if args.method == "mp":
            theta = mirsky_partition_estimate(y, box).theta_hat
        elif args.method == "bc":
            theta = borda_count_estimate(y, box).theta_hat
        elif args.method == "crl":
            theta = crl_estimate(y, rng, box).theta_hat
        elif args.method == "lse-brute":
            theta = global_lse_bruteforce(y, box).theta_hat
        else:
            theta = y
    except SizeCapExceeded:
        raise
    except ValueError as exc:
        raise ConfigError(f"cannot estimate on this input: {exc}") from exc
    try:
        with open(args.out, "w", encoding="utf-8") as f:
            write_tensor(f, theta)
    except OSError as exc:
        raise ConfigError(f"cannot write {args.out!r}: {exc}") from exc
    print(f"{args.method}: denoised {y.shape} tensor -> {args.out}", file=sys.stderr)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = parse_config_file(args.config)
    if args.timing:
        config = with_overrides(config, timing=True)
    out = args.out if args.out is not None else config.out
    if out is None:
        raise ConfigError("no output path: pass --out or put an out key in the config")
    started = time.perf_counter()
    report = monte_carlo_risk(config)
    elapsed = time.perf_counter() - started
    _write_text(out, report.to_csv())
    print(
        f"simulate: {len(report.rows)} grid point(s) x {config.reps} reps "
        f"-> {out} in {elapsed:.2f}s",
        file=sys.stderr,
    )
    return 0


def _cmd_reduce(args: argparse.Namespace) -> int:
    N, D, K, p = args.N, args.D, args.K, args.p
    if D < 2:
        raise ConfigError("--D must be >= 2")
    if N < D:
        raise ConfigError("--N must be >= --D")
    if N % D != 0 or N // D < 2:
        raise ConfigError("--N must be a multiple of --D with N/D >= 2")
    if not 0.0 <= p <= 1.0:
        raise ConfigError("--p must lie in [0, 1]")
    if not 1 <= K <= N:
        raise ConfigError("--K must lie in [1, N]")
    rng_graph = derive_rng(args.seed, 0)
    rng_kernel = derive_rng(args.seed, 1)
    clique = None
    if args.null:
        graph = sample_null(N, D, p, rng_graph)
        model = "null"
    else:
        graph, clique = sample_planted_with_vertices(N, D, p, K, rng_graph)
        model = "planted"
    if args.method == "oracle":
        if clique is None:
            raise ConfigError("--method oracle needs a planted clique; drop --null")
        estimator = clique_block_average_estimator(clique, N, D)
    elif args.method == "zero":
        estimator = np.zeros_like
    elif args.method == "mp":
        estimator = lambda z: mirsky_partition_estimate(z).theta_hat  # noqa: E731
    elif args.method == "bc":
        estimator = lambda z: borda_count_estimate(z).theta_hat  # noqa: E731
    else:
        rng_est = derive_rng(args.seed, 2)
        estimator = lambda z: crl_estimate(z, rng_est).theta_hat  # noqa: E731
    psi = da_test(graph, K, estimator, rng=rng_kernel)
    lines = [
        f"psi {psi}",
        f"model {model}",
        f"N {N}",
        f"D {D}",
        f"K {K}",
        f"p {p!r}",
        f"seed {args.seed}",
        f"method {args.method}",
        f"edges {len(graph.edges)}",
    ]
    text = "\n".join(lines) + "\n"
    if args.graph_out is not None:
        try:
            with open(args.graph_out, "w", encoding="utf-8") as f:
                write_hypergraph(f, graph)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.graph_out!r}: {exc}") from exc
    if args.out is not None:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    lines, all_ok = run_oracle_checks(seed=args.seed)
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permiso",
        description="Shuffled-lattice denoising: estimators, risk simulation, "
        "clique-to-tensor reductions, and brute-force self checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="denoise one tensor file")
    est.add_argument("--in", dest="infile", required=True, metavar="PATH")
    est.add_argument("--method", required=True, choices=ESTIMATE_METHODS)
    est.add_argument("--out", required=True, metavar="PATH")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--bounded", action="store_true", help="clamp to the box")
    est.add_argument("--box-radius", type=float, default=1.0, dest="box_radius")
    est.set_defaults(func=_cmd_estimate)

    sim = sub.add_parser("simulate", help="Monte-Carlo risk over a shape grid")
    sim.add_argument("--config", required=True, metavar="PATH")
    sim.add_argument("--out", metavar="PATH", help="overrides the config's out key")
    sim.add_argument("--timing", action="store_true", help="write wall times to the CSV")
    sim.set_defaults(func=_cmd_simulate)

    red = sub.add_parser("reduce", help="hypergraph to tensor detection pipeline")
    red.add_argument("--N", type=int, required=True, help="vertex count")
    red.add_argument("--D", type=int, required=True, help="edge arity")
    red.add_argument("--K", type=int, required=True, help="clique size under test")
    red.add_argument("--p", type=float, default=0.5, help="background edge probability")
    red.add_argument("--seed", type=int, default=0)
    red.add_argument("--method", choices=REDUCE_METHODS, default="mp")
    red.add_argument("--null", action="store_true", help="sample without a clique")
    red.add_argument("--out", metavar="PATH", help="write the result here, not stdout")
    red.add_argument("--graph-out", dest="graph_out", metavar="PATH")
    red.set_defaults(func=_cmd_reduce)

    chk = sub.add_parser("oracle-check", help="run the brute-force equivalence suites")
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--out", metavar="PATH", help="write the report here, not stdout")
    chk.set_defaults(func=_cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SizeCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
