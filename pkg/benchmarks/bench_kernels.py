#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from casescope._kernels import backends


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_knn(impl, n: int, k: int, repeats: int) -> float:
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 100, size=(n, 2))
    return _time(lambda: impl.knn_all(pts, k), repeats)


def bench_layout(impl, n: int, iters: int, repeats: int) -> float:
    rng = np.random.default_rng(1)
    pos = rng.uniform(-3, 3, size=(n, 2))
    vel = np.zeros_like(pos)
    masses = rng.integers(1, 31, size=n).astype(float)
    # eps=0-like epsilon forces the full iteration count for a fair comparison
    return _time(
        lambda: impl.layout_run(pos, vel, masses, 1.0, 0.02, 0.9, iters, 1e-300, 1.0, 1e-300),
        repeats,
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    impls = backends()
    print(f"backends available: {', '.join(impls)}")
    workloads = [
        ("knn_all n=720 k=5 (bundle-scale sweep)", lambda impl: bench_knn(impl, 720, 5, args.repeats)),
        ("knn_all n=500 k=10", lambda impl: bench_knn(impl, 500, 10, args.repeats)),
        ("layout_run n=12 iters=5000", lambda impl: bench_layout(impl, 12, 5000, args.repeats)),
        ("layout_run n=6 iters=2000", lambda impl: bench_layout(impl, 6, 2000, args.repeats)),
    ]
    results: dict[str, dict[str, float]] = {}
    for label, runner in workloads:
        results[label] = {name: runner(impl) for name, impl in impls.items()}

    width = max(len(label) for label in results)
    print(f"{'workload'.ljust(width)}  " + "  ".join(f"{n:>12}" for n in impls))
    for label, timings in results.items():
        row = "  ".join(f"{timings[name] * 1e3:>10.2f}ms" for name in impls)
        print(f"{label.ljust(width)}  {row}")
        if "native" in timings and "numpy" in timings:
            print(f"{''.ljust(width)}  speedup: {timings['numpy'] / timings['native']:.1f}x")


if __name__ == "__main__":
    main()
