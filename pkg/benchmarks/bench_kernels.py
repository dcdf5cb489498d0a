"""Times the hot convolution kernels: compiled backend vs numpy fallback.

Run from the repo root after an editable install:

    python3 benchmarks/bench_kernels.py

The compiled column is skipped when EDGEVITALS_NO_NUMBA is set or numba
is unavailable. First-call compilation happens outside the timed region.
"""

import argparse
import time

import numpy as np

from edgevitals import _kernels
from edgevitals._kernels import (
    _down_convolve_np,
    _moving_average_np,
    _up_convolve_add_np,
)
from edgevitals.ecg_preprocess import DB4_REC_HI, DB4_REC_LO, denoise_samples


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_pair(name, compiled, fallback, args, repeats):
    t_np = best_of(lambda: fallback(*args), repeats)
    if _kernels.USING_NUMBA:
        compiled(*args)  # warm the jit cache
        t_nb = best_of(lambda: compiled(*args), repeats)
        speedup = "%.1fx" % (t_np / t_nb)
        print("%-18s %10.3f ms %10.3f ms %8s" % (name, 1e3 * t_nb, 1e3 * t_np, speedup))
    else:
        print("%-18s %10s %10.3f ms %8s" % (name, "-", 1e3 * t_np, "-"))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--samples", type=int, default=75000,
                    help="signal length (default: 5 min at 250 Hz)")
    opts = ap.parse_args()

    rng = np.random.default_rng(0)
    n = opts.samples
    x = rng.normal(size=n)
    fr = np.asarray(DB4_REC_LO[::-1])
    half = rng.normal(size=n // 2)

    print("backend: %s" % ("numba" if _kernels.USING_NUMBA else "numpy fallback"))
    print("%-18s %13s %13s %8s" % ("kernel", "compiled", "numpy", "speedup"))
    bench_pair("down_convolve", _kernels.down_convolve, _down_convolve_np,
               (x, fr), opts.repeats)
    bench_pair("up_convolve_add", _kernels.up_convolve_add, _up_convolve_add_np,
               (half, half, np.asarray(DB4_REC_LO), np.asarray(DB4_REC_HI)),
               opts.repeats)
    bench_pair("moving_average", _kernels.moving_average, _moving_average_np,
               (x, 37), opts.repeats)

    denoise_samples(x[:1000], 4, "soft")  # warm
    t = best_of(lambda: denoise_samples(x, 4, "soft"), max(3, opts.repeats // 4))
    print("%-18s %10.3f ms   (4-level denoise, %d samples)" % ("end-to-end", 1e3 * t, n))


if __name__ == "__main__":
    main()
