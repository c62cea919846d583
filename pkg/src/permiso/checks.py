"""Self-contained equivalence suites pitting fast routines against brute force.

Every check re-derives its expected answers from first principles (subset
enumeration, exhaustive search) rather than calling the code under test a
second way, so a green run is evidence the optimized paths are right.
Deterministic for a fixed seed.
"""

from __future__ import annotations

import itertools

import numpy as np

from .estimators import global_lse_bruteforce, permutation_lemma_check
from .lattice import LatticeShape, PermutationTuple, apply_permutations, derive_rng, empirical_sq_loss
from .orders import ComparisonDigraph, has_cycle, mirsky_decompose
from .solvers import isotonic_minmax_oracle, isotonic_project, pava

__all__ = ["run_oracle_checks"]


def _reachability(n: int, edges) -> list:
    adj = [0] * n
    for u, v in edges:
        adj[u] |= 1 << v
    reach = [0] * n
    for u in range(n):
        seen = 0
        stack = [u]
        while stack:
            w = stack.pop()
            fresh = adj[w] & ~seen
            while fresh:
                bit = fresh & -fresh
                fresh ^= bit
                seen |= bit
                stack.append(bit.bit_length() - 1)
        reach[u] = seen
    return reach


def _min_antichain_cover(n: int, edges) -> int:
    """Smallest number of mutually-incomparable groups covering all nodes.

    Exponential subset DP; comparability means reachability, not adjacency.
    """
    reach = _reachability(n, edges)

    def is_antichain(mask: int) -> bool:
        m = mask
        while m:
            bit = m & -m
            m ^= bit
            if reach[bit.bit_length() - 1] & mask:
                return False
        return True

    memo = {0: 0}

    def solve(s: int) -> int:
        if s in memo:
            return memo[s]
        low = s & -s
        best = n
        sub = s
        while sub:
            # only groups containing the lowest remaining node: some group has it
            if sub & low and is_antichain(sub):
                best = min(best, 1 + solve(s ^ sub))
            sub = (sub - 1) & s
        memo[s] = best
        return best

    return solve((1 << n) - 1)


def _random_dag(n: int, rng) -> set:
    order = rng.permutation(n)
    pos = np.argsort(order)
    edges = set()
    for u in range(n):
        for v in range(n):
            if u != v and pos[u] < pos[v] and rng.random() < 0.4:
                edges.add((u, v))
    return edges


def _check_pava_vs_minmax(rng) -> tuple:
    cases = 0
    for _ in range(60):
        length = int(rng.integers(2, 7))
        vals = rng.standard_normal(length)
        wts = rng.uniform(0.2, 3.0, size=length) if rng.random() < 0.5 else None
        got = pava(vals, wts)
        want = isotonic_minmax_oracle(vals, wts)
        if not np.allclose(got, want, atol=1e-8):
            return cases, f"values {vals.tolist()} weights {wts}: {got} != {want}"
        cases += 1
    return cases, None


def _check_dykstra_vs_minmax(rng) -> tuple:
    cases = 0
    for shape in ((3, 3), (2, 2, 2), (2, 4)):
        for k in range(8):
            vals = rng.standard_normal(shape)
            wts = rng.uniform(0.2, 3.0, size=shape) if k % 2 else None
            box = 1.0 if k % 4 >= 2 else None
            got = isotonic_project(vals, wts, box)
            want = isotonic_minmax_oracle(vals, wts)
            if box is not None:
                want = np.clip(want, -box, box)
            if not np.allclose(got, want, atol=1e-6):
                return cases, f"shape {shape} case {k}: max gap {np.abs(got - want).max()}"
            cases += 1
    return cases, None


def _check_projection_fixed_point(rng) -> tuple:
    cases = 0
    for _ in range(20):
        d = int(rng.integers(1, 4))
        n1 = int(rng.integers(2, 5))
        dims = (n1,) * d
        t = rng.exponential(1.0, size=dims)
        for axis in range(d):
            t = np.cumsum(t, axis=axis)  # stays nonnegative, so monotone on every axis
        t = t - t.mean()
        got = isotonic_project(t)
        if not np.allclose(got, t, atol=1e-8):
            return cases, f"d={d} n1={n1}: monotone input moved by {np.abs(got - t).max()}"
        cases += 1
    return cases, None


def _all_small_dags(n: int):
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    for bits in range(1 << len(pairs)):
        edges = {pairs[i] for i in range(len(pairs)) if bits >> i & 1}
        g = ComparisonDigraph(node_count=n, edges=frozenset(edges))
        if not has_cycle(g):
            yield g


def _check_mirsky_vs_bruteforce(rng) -> tuple:
    cases = 0
    graphs = list(_all_small_dags(3))
    for _ in range(200):
        n = int(rng.integers(4, 6))
        graphs.append(ComparisonDigraph(node_count=n, edges=frozenset(_random_dag(n, rng))))
    for g in graphs:
        part = mirsky_decompose(g)
        want = _min_antichain_cover(g.node_count, g.edges)
        if part.card != want:
            return cases, f"{g}: got {part.card} groups, brute force says {want}"
        reach = _reachability(g.node_count, g.edges)
        level = {}
        for idx, block in enumerate(part.blocks):
            for v in block:
                level[v] = idx
        for block in part.blocks:
            for u, v in itertools.combinations(block, 2):
                if reach[u] >> v & 1 or reach[v] >> u & 1:
                    return cases, f"{g}: block {block} is not an antichain"
        for u, v in g.edges:
            if level[u] >= level[v]:
                return cases, f"{g}: edge ({u}, {v}) not respected by levels"
        cases += 1
    return cases, None


def _check_lse_noiseless_recovery(rng) -> tuple:
    cases = 0
    for d in (1, 2, 3):
        for n1 in (2, 3):
            shape = LatticeShape(d, n1)
            parts = [np.sort(rng.standard_normal(n1) * 2.0) for _ in range(d)]
            truth = np.zeros(shape.dims)
            for axis, part in enumerate(parts):
                idx = [None] * d
                idx[axis] = slice(None)
                truth = truth + part[tuple(idx)]
            perms = PermutationTuple.random(d, n1, rng)
            y = apply_permutations(truth, perms)
            result = global_lse_bruteforce(y)
            loss = empirical_sq_loss(result.theta_hat, y)
            if loss > 1e-18:
                return cases, f"d={d} n1={n1}: noiseless loss {loss}"
            cases += 1
    return cases, None


def _check_order_lemma(rng) -> tuple:
    cases = 0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        a = np.sort(rng.standard_normal(n))
        b = a + rng.uniform(-0.3, 0.3, size=n)
        tau = float(rng.uniform(0.05, 1.0))
        # jitter below tau/2 keeps the premise: b_j - b_i > tau still sorts i first
        jitter = 0.5 * tau * rng.uniform(-1.0, 1.0, size=n)
        order = np.argsort(b + jitter, kind="stable")
        pi = np.argsort(order)
        if not permutation_lemma_check(a, b, tau, pi):
            return cases, f"displacement bound failed (n={n}, tau={tau})"
        cases += 1
    return cases, None


_CHECKS = (
    ("pava-vs-minmax", _check_pava_vs_minmax),
    ("dykstra-vs-minmax", _check_dykstra_vs_minmax),
    ("projection-fixed-point", _check_projection_fixed_point),
    ("mirsky-vs-bruteforce", _check_mirsky_vs_bruteforce),
    ("lse-noiseless-recovery", _check_lse_noiseless_recovery),
    ("order-lemma-inequality", _check_order_lemma),
)


def run_oracle_checks(seed: int = 0) -> tuple:
    """Run every suite; returns (report lines, all passed)."""
    lines = []
    all_ok = True
    for index, (name, fn) in enumerate(_CHECKS):
        rng = derive_rng(seed, index)
        cases, failure = fn(rng)
        if failure is None:
            lines.append(f"ok {name} ({cases} cases)")
        else:
            all_ok = False
            lines.append(f"FAIL {name} after {cases} cases: {failure}")
    return lines, all_ok
