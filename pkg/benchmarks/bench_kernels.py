#!/usr/bin/env python3
"""Benchmark the compiled GA kernels against the pure-numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--n 50] [--pop 50] [--reps 2000]
"""

import argparse
import time

import numpy as np


def bench(label, fn, reps):
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(reps):
        fn()
    per_call = (time.perf_counter() - start) / reps
    print(f"  {label:<22} {per_call * 1e6:10.1f} us/call")
    return per_call


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=50, help="genome length")
    parser.add_argument("--pop", type=int, default=50, help="population size")
    parser.add_argument("--reps", type=int, default=2000)
    args = parser.parse_args()

    from testrank.kernels import _py

    backends = [("python", _py)]
    try:
        from testrank.kernels import _ga

        backends.append(("compiled", _ga))
    except ImportError:
        print("compiled kernel not built; benchmarking the fallback only")

    rng = np.random.default_rng(0)
    pop = np.stack([rng.permutation(args.n) for _ in range(args.pop)]).astype(np.int64)
    p2 = np.stack([rng.permutation(args.n) for _ in range(args.pop)]).astype(np.int64)
    scores = rng.random(args.n)
    cuts = rng.integers(0, args.n, size=(2, args.pop))
    lo = np.minimum(cuts[0], cuts[1]).astype(np.int64)
    hi = np.maximum(cuts[0], cuts[1]).astype(np.int64)

    results = {}
    print(f"n={args.n} pop={args.pop} reps={args.reps}")
    print("fitness_batch:")
    for name, mod in backends:
        results[("fitness", name)] = bench(name, lambda m=mod: m.fitness_batch(pop, scores, 0.9), args.reps)
    print("ox1_batch:")
    for name, mod in backends:
        results[("ox1", name)] = bench(name, lambda m=mod: m.ox1_batch(pop, p2, lo, hi), args.reps)

    if len(backends) == 2:
        for op in ("fitness", "ox1"):
            speedup = results[(op, "python")] / results[(op, "compiled")]
            print(f"{op}: compiled is {speedup:.1f}x faster")
        c_py = _py.ox1_batch(pop, p2, lo, hi)
        c_c = backends[1][1].ox1_batch(pop, p2, lo, hi)
        assert (c_py == c_c).all(), "backends disagree"
        print("backends produce identical children")


if __name__ == "__main__":
    main()
