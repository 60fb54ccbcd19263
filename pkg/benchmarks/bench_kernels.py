"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from cdgwalk import _fallback

try:
    from cdgwalk import _kernels
except ImportError:
    _kernels = None


def cases():
    p = (1 << 20) - 1
    start = np.zeros(p)
    start[0] = 1.0
    mass = np.random.default_rng(0).random(p)
    mass /= mass.sum()
    third = 1 / 3
    return [
        ("evolve_many p=2^20-1 x20", lambda k: k.evolve_many(start, third, third, third, 20)),
        ("tv_uniform p=2^20-1", lambda k: k.tv_uniform(mass)),
        ("sample_paths 100k x 40 steps", lambda k: k.sample_paths(7, p, third, third, 40, 0, 100_000)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':32s} {'python (s)':>12s} {'cython (s)':>12s} {'speedup':>8s}")
    for name, fn in cases():
        py = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:32s} {py:12.4f} {'-':>12s} {'-':>8s}")
            continue
        cy = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat))
        print(f"{name:32s} {py:12.4f} {cy:12.4f} {py / cy:8.1f}x")


if __name__ == "__main__":
    main()
