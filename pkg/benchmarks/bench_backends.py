"""Benchmark the numba kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_backends.py

Both implementations are timed in-process regardless of the active
FPUKDV_BACKEND, so the comparison is apples-to-apples.  Numba timings
exclude the one-off JIT compilation (a warm-up call is made first).
"""

import time

import numpy as np

from fpukdv import kernels


def _best_of(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_fourier_eval(M=1024, n_points=2560):
    rng = np.random.default_rng(0)
    coeffs = np.fft.fft(rng.standard_normal(M))
    L = 64.0
    points = rng.uniform(0.0, L, n_points)

    results = {"numpy": _best_of(lambda: kernels.fourier_eval_numpy(coeffs, L, points))}
    if hasattr(kernels, "fourier_eval_numba"):
        kernels.fourier_eval_numba(coeffs, L, points)  # warm-up / compile
        results["numba"] = _best_of(lambda: kernels.fourier_eval_numba(coeffs, L, points))
    return results


def bench_fpu_rk4(N=640, nsteps=2000, dt=0.05, eps2=0.01, p=2):
    rng = np.random.default_rng(1)
    u0 = 0.1 * rng.standard_normal(N)
    q0 = 0.1 * rng.standard_normal(N)

    def run(fn):
        u, q = u0.copy(), q0.copy()
        fn(u, q, eps2, p, dt, nsteps)

    results = {"numpy": _best_of(lambda: run(kernels.fpu_rk4_numpy))}
    if hasattr(kernels, "fpu_rk4_numba"):
        run(kernels.fpu_rk4_numba)  # warm-up / compile
        results["numba"] = _best_of(lambda: run(kernels.fpu_rk4_numba))
    return results


def _print_table(name, results):
    base = results["numpy"]
    print(f"\n{name}")
    for backend, t in results.items():
        speedup = f"  ({base / t:5.1f}x vs numpy)" if backend != "numpy" else ""
        print(f"  {backend:6s}  {t * 1e3:10.3f} ms{speedup}")


if __name__ == "__main__":
    print(f"active backend: {kernels.BACKEND}")
    _print_table("fourier_eval  (M=1024 coefficients, 2560 points)", bench_fourier_eval())
    _print_table("fpu_rk4       (N=640 sites, 2000 steps)", bench_fpu_rk4())
