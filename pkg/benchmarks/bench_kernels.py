"""Compare the numba kernels against their numpy counterparts.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The numba timings exclude the first (compiling) call.
"""
import argparse
import timeit

import numpy as np

from rieszmix import _kernels


def cases(rng):
    n = 2 ** 16
    labels = rng.integers(0, 2 ** 10, n).astype(np.int64)
    labels[: 2 ** 10] = np.arange(2 ** 10)
    w = rng.random(n)
    w /= w.sum()
    v1 = rng.standard_normal(n)
    v2 = rng.standard_normal((n, 16))
    terms = rng.choice([-1.0, 1.0], size=(4096, 1024))
    grid = np.array([4, 16, 64, 256, 1024])
    return {
        "block_average 1-D (65536 atoms, 1024 blocks)": (
            lambda: _kernels.block_average_numpy(v1, w, labels, 1024),
            lambda: _kernels.block_average(v1, w, labels, 1024),
        ),
        "block_average 2-D (65536 x 16)": (
            lambda: _kernels.block_average_numpy(v2, w, labels, 1024),
            lambda: _kernels.block_average(v2, w, labels, 1024),
        ),
        "cesaro_abs_stats (4096 paths x 1024)": (
            lambda: _kernels.cesaro_abs_stats_numpy(terms, grid),
            lambda: _kernels.cesaro_abs_stats(terms, grid),
        ),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAS_NUMBA:
        print("numba unavailable or disabled; both columns time the numpy kernels")
    print(f"{'kernel':48s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, (slow, fast) in cases(np.random.default_rng(0)).items():
        assert np.allclose(slow(), fast(), atol=1e-9), name
        t_np = min(timeit.repeat(slow, number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(fast, number=1, repeat=args.repeat)) * 1e3
        print(f"{name:48s} {t_np:10.2f} {t_nb:10.2f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
