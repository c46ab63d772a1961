"""Time the numba kernels against their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py --repeat 7
"""
import argparse
import timeit

import numpy as np

from hetreg import kernels
from hetreg.numerics import default_max_iter


def cases(d, m, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((m, d))
    A = X.T @ X / m
    b = rng.standard_normal(d)
    floor = 1e-12 * np.trace(A) / d
    # eigen-gap so the power iteration converges in a moderate number of steps
    u = rng.standard_normal(d)
    P = A + 2.0 * np.outer(u, u) / (u @ u)
    v0 = rng.standard_normal(d)
    f = rng.standard_normal(d)
    a, bb = X @ f, X @ (f + 0.1)
    r2 = rng.standard_normal(m) ** 2 * a * a
    mu = 0.3 * np.linalg.norm(f)
    return {
        "cholesky_solve": (kernels.cholesky_solve_numpy, kernels.cholesky_solve_numba, (A, b, floor)),
        "power_iteration": (kernels.power_iteration_numpy, kernels.power_iteration_numba,
                            (P, v0, 1e-10, default_max_iter(d))),
        "truncated_pseudograd": (kernels.truncated_pseudograd_numpy, kernels.truncated_pseudograd_numba,
                                 (X, a, bb, r2, mu)),
    }


def best_time(fn, args, repeat, number):
    return min(timeit.repeat(lambda: fn(*args), repeat=repeat, number=number)) / number


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d", type=int, nargs="+", default=[10, 50, 200])
    p.add_argument("--m", type=int, default=5000, help="rows for the pseudogradient kernel")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--number", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    print(f"{'kernel':<22}{'d':>5}{'numpy [us]':>14}{'numba [us]':>14}{'speedup':>10}")
    for d in args.d:
        for name, (slow, fast, call) in cases(d, args.m, args.seed).items():
            fast(*call)  # compile outside the timed region
            t_np = best_time(slow, call, args.repeat, args.number)
            t_nb = best_time(fast, call, args.repeat, args.number)
            print(f"{name:<22}{d:>5}{t_np * 1e6:>14.1f}{t_nb * 1e6:>14.1f}{t_np / t_nb:>9.2f}x")


if __name__ == "__main__":
    main()
