"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--size 224] [--repeat 5]

The first jitted call (compilation, or cache load) is excluded from timing.
"""
import argparse
import time

import numpy as np

from simon import kernels
from simon.imaging import gaussian_kernel


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(size, rng):
    img = rng.random((3 * size, size))
    w = gaussian_kernel(4.0)
    n = size * size
    xs = np.tile(np.arange(size), size).astype(np.int64)
    ys = np.repeat(np.arange(size), size).astype(np.int64)
    weights = rng.random(n)

    def sas_args():
        return xs, ys, weights, np.full(n, np.inf), np.zeros(n, dtype=np.bool_), size // 2, size // 2

    levels = rng.random((6, size, size, 3))
    sigma = rng.uniform(0, 8, size=(size, size))
    return {
        "convolve_lines": lambda k: k(img, w),
        "sas_step": lambda k: k(*sas_args()),
        "pow_weights": lambda k: k(weights, 0.5),
        "pyramid_blend": lambda k: k(levels, sigma, 8.0 / 5),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=224)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, call in cases(args.size, rng).items():
        jit_k, np_k = kernels.JIT_KERNELS[name], kernels.NUMPY_KERNELS[name]
        call(jit_k)  # compile / load cache
        t_jit = _best_of(lambda: call(jit_k), args.repeat)
        t_np = _best_of(lambda: call(np_k), args.repeat)
        print(f"{name:<16}{t_jit * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_jit:>10.1f}x")


if __name__ == "__main__":
    main()
