"""Timing comparison of the numba and numpy kernel backends.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeats N]

Each kernel is timed on a fixed workload after a warmup call (which also
absorbs jit compilation). The table reports best-of-N wall times.
"""

import argparse
import time

import numpy as np

from orbitframes import backend
from orbitframes.kernels import (
    coeff_power_sum,
    gram_lambda_min,
    orbit_gram,
    ratmat_eval_grid,
)


def build_workloads(rng):
    m, k, deg = 4, 4, 6
    num = np.ascontiguousarray(
        rng.standard_normal((m, k, deg + 1))
        + 1j * rng.standard_normal((m, k, deg + 1)))
    den = np.zeros((m, k, 2), dtype=np.complex128)
    den[:, :, 0] = 1.0
    den[:, :, 1] = 0.3 * rng.standard_normal((m, k))
    pts = np.ascontiguousarray(
        0.95 * np.sqrt(rng.uniform(0, 1, 20000))
        * np.exp(2j * np.pi * rng.uniform(0, 1, 20000)))

    fvals = np.ascontiguousarray(
        rng.standard_normal((20000, 3, 1))
        + 1j * rng.standard_normal((20000, 3, 1)))
    tvals = np.ascontiguousarray(
        rng.standard_normal((20000, 3, 3))
        + 1j * rng.standard_normal((20000, 3, 3)))

    T = rng.standard_normal((24, 24)) + 1j * rng.standard_normal((24, 24))
    T = np.ascontiguousarray(T * (0.9 / np.max(np.abs(np.linalg.eigvals(T)))))
    G = np.ascontiguousarray(
        rng.standard_normal((24, 3)) + 1j * rng.standard_normal((24, 3)))

    w = np.ascontiguousarray(
        rng.standard_normal(4096) + 1j * rng.standard_normal(4096))

    return {
        "ratmat_eval_grid (20k pts, 4x4 deg 6)":
            lambda: ratmat_eval_grid(num, den, pts),
        "gram_lambda_min (20k pts, m=3)":
            lambda: gram_lambda_min(fvals, tvals),
        "orbit_gram (d=24, k=3, 2048 terms)":
            lambda: orbit_gram(T, G, 2048),
        "coeff_power_sum (4096 pts, |n|<=1024)":
            lambda: coeff_power_sum(w, 1024),
    }


def best_time(fn, repeats):
    fn()  # warmup / jit compile
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = ["numpy"]
    if backend._numba_available():
        backends.append("numba")
    else:
        print("numba not importable; timing the numpy path only\n")

    rng = np.random.default_rng(0)
    workloads = build_workloads(rng)

    results = {}
    for name in backends:
        backend.set_backend(name)
        assert backend.active_backend() == name
        for label, fn in workloads.items():
            results[(label, name)] = best_time(fn, args.repeats)
    backend.set_backend(None)

    width = max(len(label) for label in workloads) + 2
    header = f"{'kernel':<{width}}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label in workloads:
        row = f"{label:<{width}}"
        for b in backends:
            row += f"{results[(label, b)] * 1e3:>10.2f}ms"
        if len(backends) == 2:
            ratio = results[(label, 'numpy')] / results[(label, 'numba')]
            row += f"{ratio:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()
