"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best time per call for each kernel on simulation-sized inputs
and the speedup of the compiled core.
"""
import argparse
import timeit

import numpy as np

from mimopred.kernels import _fallback

try:
    from mimopred.kernels import _core
except ImportError:
    _core = None


def cases(rng):
    c = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
    amps = c(120, 4)
    zeta, tau = rng.uniform(-0.015, 0.015, 120), rng.uniform(0, 0.25, 120)
    t, n = np.arange(20.0), np.array([25.0, 75.0, 125.0, 175.0])
    rows = c(400, 50)
    h = c(8, 4)
    w = rng.uniform(0.5, 2.0, 8)
    mask = np.ones(8, dtype=bool)
    return {
        "synth_grid (120 subpaths, 20x4x4)": ("synth_grid", (amps, zeta, tau, t, n)),
        "smoothed_covariance (400x50, L=25)": ("smoothed_covariance", (rows, 25)),
        "zf_gains (4 of 8 users)": ("zf_gains", (h, np.arange(4))),
        "greedy_zf (K=8, M=4)": ("greedy_zf", (h, w, mask, 100.0, 4)),
    }


def best(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05:
        number *= 4
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} {'python':>12s} {'cython':>12s} {'speedup':>8s}")
    for label, (name, fargs) in cases(rng).items():
        tp = best(getattr(_fallback, name), fargs, args.repeat)
        if _core is None:
            print(f"{label:40s} {tp * 1e6:10.1f}us {'n/a':>12s} {'n/a':>8s}")
            continue
        tc = best(getattr(_core, name), fargs, args.repeat)
        print(f"{label:40s} {tp * 1e6:10.1f}us {tc * 1e6:10.1f}us {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
