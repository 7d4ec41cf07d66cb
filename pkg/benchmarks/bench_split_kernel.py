"""Times the compiled split kernel against the numpy fallback.

Both implementations are imported directly so one process can measure
the two side by side regardless of which backend the package selected.

    python3 benchmarks/bench_split_kernel.py [--sizes 256,1024,...] [--repeats N]
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from mimicry.classifier import _split_py

try:
    from mimicry.classifier import _split as _compiled
except ImportError:
    _compiled = None


def make_case(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    values = np.sort(rng.normal(size=n))
    labels = (rng.random(n) < 0.4).astype(np.float64)
    return values, labels


def time_kernel(fn, cases, repeats: int) -> float:
    """Median seconds for one sweep over all cases."""
    sweeps = []
    for _ in range(repeats):
        start = time.perf_counter()
        for values, labels in cases:
            fn(values, labels, 1)
        sweeps.append(time.perf_counter() - start)
    return statistics.median(sweeps)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="64,256,1024,4096,16384",
                        help="comma-separated input lengths")
    parser.add_argument("--repeats", type=int, default=9,
                        help="sweeps per size; the median is reported")
    parser.add_argument("--cases", type=int, default=20,
                        help="distinct inputs per size")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _compiled is None:
        print("compiled kernel not built; run: python3 setup.py build_ext --inplace")

    print(f"{'n':>8} {'pure (us/call)':>16} {'compiled (us/call)':>20} {'speedup':>9}")
    for n in sizes:
        cases = [make_case(n, seed) for seed in range(args.cases)]
        pure_t = time_kernel(_split_py.best_split_sorted, cases, args.repeats)
        pure_us = 1e6 * pure_t / len(cases)
        if _compiled is None:
            print(f"{n:>8} {pure_us:>16.2f} {'-':>20} {'-':>9}")
            continue
        for values, labels in cases:
            a = _split_py.best_split_sorted(values, labels, 1)
            b = _compiled.best_split_sorted(values, labels, 1)
            assert repr(a) == repr(b), f"backends disagree on n={n}: {a} vs {b}"
        comp_t = time_kernel(_compiled.best_split_sorted, cases, args.repeats)
        comp_us = 1e6 * comp_t / len(cases)
        print(f"{n:>8} {pure_us:>16.2f} {comp_us:>20.2f} {pure_t / comp_t:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
