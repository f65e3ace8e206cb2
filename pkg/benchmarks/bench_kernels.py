"""Timing comparison of the fading synthesis kernel backends.

Run with: python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from dopplertrack import kernels


def make_inputs(n_l=9, n_m=64, n_t=100_000, seed=0):
    rng = np.random.default_rng(seed)
    return (rng.uniform(0.05, 0.4, size=n_l),
            rng.uniform(-2500.0, 2500.0, size=(n_l, n_m)),
            rng.uniform(0, 2 * np.pi, size=(n_l, n_m)),
            rng.uniform(0, 2 * np.pi, size=(n_l, n_m)),
            np.sort(rng.uniform(0, 1.0, size=n_t)))


def bench(fn, args, reps=5):
    fn(*args)  # warm up
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    print("active backend:", kernels.BACKEND)
    for n_t in (10_000, 100_000, 500_000):
        args = make_inputs(n_t=n_t)
        t_ref = bench(kernels.reference_sos_gains, args)
        row = "n_t=%7d  numpy %.4fs" % (n_t, t_ref)
        if kernels.BACKEND == "cython":
            t_act = bench(kernels.sos_gains, args)
            row += "  cython %.4fs  speedup %.2fx" % (t_act, t_ref / t_act)
        print(row)


if __name__ == "__main__":
    main()
