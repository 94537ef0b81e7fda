"""Compare the compiled and pure-Python kernels on representative workloads.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from mobilicast import _pykernels

try:
    from mobilicast import _ckernels
except ImportError:
    _ckernels = None


def workloads(rng):
    chains = [rng.integers(0, 11, size=rng.integers(1, 12)).tolist() for _ in range(400)]
    queries = [rng.integers(0, 11, size=rng.integers(1, 12)).tolist() for _ in range(100)]
    pts = rng.normal(size=(60, 121))
    dist = ((pts[:, None] - pts[None]) ** 2).sum(-1)
    return {
        "levenshtein x20000": lambda k: [k.levenshtein(a, b) for a, b in zip(chains * 50, chains[1:] * 50)],
        "nearest_distance 100x400": lambda k: [k.nearest_distance(q, chains) for q in queries],
        "ward n=60": lambda k: k.ward_lance_williams(dist),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'workload':<28}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in workloads(rng).items():
        py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<28}{py:>12.2f}{'n/a':>12}{'':>10}")
            continue
        assert fn(_ckernels) == fn(_pykernels)
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<28}{py:>12.2f}{cy:>12.2f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
