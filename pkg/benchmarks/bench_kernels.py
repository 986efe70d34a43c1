"""Compare the compiled kernels with the numpy fallback.

Run: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from fracutm import _fallback, kernels


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    x = np.sort(rng.uniform(0, 40, 1000))
    k = rng.uniform(0, 50, 3000) * np.exp(1j * rng.uniform(0.2, 2.9, 3000))
    c = rng.standard_normal(3000) + 1j * rng.standard_normal(3000)
    yield "exp_sum 1000 x 3000", lambda m: m.exp_sum(x, k, c)
    yield "exp_sum_abs 1000 x 3000", lambda m: m.exp_sum_abs(x, k, c)
    b = rng.standard_normal(4000)
    v = rng.standard_normal(4000) + 1j * rng.standard_normal(4000)
    yield "causal_toeplitz n=4000", lambda m: m.causal_toeplitz(b, v)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    print(f"backend: {kernels.BACKEND}")
    print(f"{'kernel':28s} {'compiled [s]':>12s} {'numpy [s]':>10s} {'speed-up':>9s} {'max rel diff':>13s}")
    for name, call in cases(rng):
        tc = best_of(lambda: call(kernels), args.repeat)
        tp = best_of(lambda: call(_fallback), args.repeat)
        a, b = call(kernels), call(_fallback)
        diff = float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
        print(f"{name:28s} {tc:12.4f} {tp:10.4f} {tp / tc:9.2f} {diff:13.2e}")


if __name__ == "__main__":
    main()
