#!/usr/bin/env python3
"""Benchmark the compiled solver kernels against the pure-Python reference.

The two backends are semantically interchangeable and must produce
identical outputs; this script times both on representative workloads,
verifies that equivalence on the way, and prints a speedup table.

    python3 benchmarks/bench_kernels.py [--scale {small,large}] [--repeats N]
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from heurevo.kernels import available_backends


def euclidean_instance(rng: np.random.Generator, n: int) -> np.ndarray:
    coords = rng.uniform(0.0, 100.0, size=(n, 2))
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff**2).sum(-1))


def build_workloads(scale: str):
    rng = np.random.default_rng(0)
    if scale == "large":
        tsp_n, tsp_rounds = 120, 200
        bpp_n, mkp_n = 150, 120
        ants, iters = 20, 50
    else:
        tsp_n, tsp_rounds = 60, 100
        bpp_n, mkp_n = 80, 60
        ants, iters = 10, 20

    dist = euclidean_instance(rng, tsp_n)
    demands = rng.integers(20, 101, size=bpp_n).astype(np.int64)
    promise = rng.uniform(0.1, 1.0, size=(bpp_n, bpp_n))
    values = rng.uniform(1.0, 50.0, size=mkp_n)
    weights = rng.uniform(1.0, 20.0, size=(5, mkp_n))
    capacities = weights.sum(axis=1) / 2.0
    desirability = values / (weights.mean(axis=0) + 1.0)

    return [
        (
            f"gls_run        n={tsp_n} rounds={tsp_rounds}",
            lambda impl: impl.gls_run(dist, dist.copy(), tsp_rounds, 0.1),
        ),
        (
            f"aco_bpp_run    n={bpp_n} ants={ants} iters={iters}",
            lambda impl: impl.aco_bpp_run(
                demands, 150, promise, ants, iters, 0.1, 1.0, 7
            ),
        ),
        (
            f"aco_mkp_run    n={mkp_n} ants={ants} iters={iters}",
            lambda impl: impl.aco_mkp_run(
                values, weights, capacities, desirability, ants, iters, 0.1, 1.0, 7
            ),
        ),
    ]


def canonical(result):
    """Flatten a kernel result into plainly comparable pieces."""
    out = []
    for part in result:
        if isinstance(part, np.ndarray):
            out.append(part.tolist())
        else:
            out.append(part)
    return out


def best_time(fn, impl, repeats: int) -> tuple[float, object]:
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(impl)
        best = min(best, time.perf_counter() - start)
    return best, result


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--scale", choices=("small", "large"), default="small")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled backend not importable; nothing to compare", file=sys.stderr)
        return 1

    print(f"scale={args.scale} repeats={args.repeats} (best-of)")
    header = f"{'kernel':<42} {'pure':>10} {'compiled':>10} {'speedup':>9} {'match':>6}"
    print(header)
    print("-" * len(header))

    mismatched = False
    for name, fn in build_workloads(args.scale):
        pure_t, pure_res = best_time(fn, backends["pure"], args.repeats)
        comp_t, comp_res = best_time(fn, backends["compiled"], args.repeats)
        match = canonical(pure_res) == canonical(comp_res)
        mismatched |= not match
        print(
            f"{name:<42} {pure_t:>9.4f}s {comp_t:>9.4f}s "
            f"{pure_t / comp_t:>8.1f}x {'yes' if match else 'NO':>6}"
        )

    if mismatched:
        print("\nbackend outputs differ; the fallback is the reference", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
