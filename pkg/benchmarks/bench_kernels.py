#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Covers the two hot paths: per-sector unitary evolution (the quantum
walk) and torus-map iteration (orbits and tangent growth).  The evolve
comparison also reports the agreement between backends.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from chaoswalk import HarperParams, WalkConfig, build_harper, initial_state, sector_blocks
from chaoswalk.kernels import _fallback

try:
    from chaoswalk.kernels import _speedups
except ImportError:
    _speedups = None


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_evolve(m: int, n: int, steps: int, repeat: int) -> None:
    coin = build_harper(m, HarperParams(g=0.4))
    cfg = WalkConfig(coin=coin, n_sites=n)
    blocks = sector_blocks(cfg)
    vectors = initial_state(cfg).vectors
    label = f"evolve m={m:<4d} n={n:<4d} steps={steps}"
    t_py = _time(lambda: _fallback.evolve_sector_vectors(blocks, vectors, steps), repeat)
    print(f"{label}  fallback {t_py * 1e3:9.2f} ms", end="")
    if _speedups is None:
        print("  (compiled backend not built)")
        return
    t_cy = _time(lambda: _speedups.evolve_sector_vectors(blocks, vectors, steps), repeat)
    a = _fallback.evolve_sector_vectors(blocks, vectors, steps)
    b = _speedups.evolve_sector_vectors(blocks, vectors, steps)
    diff = float(np.max(np.abs(a - b)))
    print(f"  compiled {t_cy * 1e3:9.2f} ms  speedup {t_py / t_cy:6.2f}x  |diff| {diff:.2e}")


def bench_map(n_steps: int, repeat: int) -> None:
    args = (0.2, 0.3, 0.4, 1.0, n_steps)
    for name in ("harper_orbit", "harper_log_stretch"):
        t_py = _time(lambda: getattr(_fallback, name)(*args), repeat)
        print(f"{name} steps={n_steps}  fallback {t_py * 1e3:9.2f} ms", end="")
        if _speedups is None:
            print("  (compiled backend not built)")
            continue
        t_cy = _time(lambda: getattr(_speedups, name)(*args), repeat)
        same = bool(np.array_equal(getattr(_fallback, name)(*args), getattr(_speedups, name)(*args)))
        print(f"  compiled {t_cy * 1e3:9.2f} ms  speedup {t_py / t_cy:6.2f}x  bitwise={same}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    bench_evolve(8, 101, 2000, args.repeat)
    bench_evolve(64, 101, 100, args.repeat)
    bench_evolve(256, 101, 40, args.repeat)
    bench_evolve(100, 21, 200, args.repeat)
    bench_map(100000, args.repeat)


if __name__ == "__main__":
    main()
