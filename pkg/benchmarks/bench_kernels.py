"""Timing comparison of the compiled and pure-numpy kernel backends.

Runs the hot kernels (expected maximum, terminal loss, recursive loss,
episode simulation, event flags) through both backend modules on identical
inputs, checks that the results agree, and prints a timing table.

Usage: python3 benchmarks/bench_kernels.py [--reps 50000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bayesbai import _kernels_nb as nb
from bayesbai import _kernels_np as npk
from bayesbai._quad import gauss_hermite, gauss_legendre_unit


def timeit(fn, number: int) -> float:
    fn()  # warm up (triggers JIT compilation on the compiled backend)
    t0 = time.perf_counter()
    for _ in range(number):
        fn()
    return (time.perf_counter() - t0) / number


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=50_000, help="simulation rows")
    ap.add_argument("--batch", type=int, default=20_000, help="batched-kernel rows")
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    glx, glw = gauss_legendre_unit(10)
    ghx, ghw = gauss_hermite(8)

    K = 3
    mu = rng.normal(size=(args.batch, K))
    var = 1.0 / rng.integers(1, 8, size=(args.batch, K)).astype(float)
    N = np.round(1.0 / var)
    S = mu * N

    rows = []

    def bench(name, f_nb, f_np, number):
        r_nb, r_np = f_nb(), f_np()
        gap = float(np.max(np.abs(np.asarray(r_nb) - np.asarray(r_np))))
        t_nb = timeit(f_nb, number)
        t_np = timeit(f_np, number)
        rows.append((name, t_nb, t_np, t_np / t_nb, gap))

    def with_out(fn, shape, dtype=float):
        def run():
            out = np.empty(shape, dtype=dtype)
            fn(out)
            return out

        return run

    bench(
        f"expected_max batch ({args.batch}x{K})",
        with_out(lambda o: nb.emax_batch(mu, var, glx, glw, o), args.batch),
        with_out(lambda o: npk.emax_batch(mu, var, glx, glw, o), args.batch),
        3,
    )
    bench(
        f"terminal loss batch ({args.batch}x{K})",
        with_out(lambda o: nb.terminal_batch(S, N, glx, glw, o), args.batch),
        with_out(lambda o: npk.terminal_batch(S, N, glx, glw, o), args.batch),
        3,
    )

    S3 = np.array([0.6, -0.5, 0.2])
    N3 = np.array([2.0, 1.0, 3.0])
    for budget in (2, 3):
        bench(
            f"recursive loss K=3 budget={budget} (order 8)",
            with_out(lambda o, b=budget: nb.dp_arm_losses(S3, N3, b, ghx, ghw, glx, glw, o), K),
            with_out(lambda o, b=budget: npk.dp_arm_losses(S3, N3, b, ghx, ghw, glx, glw, o), K),
            20 if budget == 2 else 3,
        )

    means = np.array([0.0, 0.0, 0.5])
    prior = np.zeros(3)
    T = 60
    normals = rng.standard_normal((args.reps, T + K))
    pulls = np.array([15, 7], dtype=np.int64)
    zeros = np.zeros(3)
    for code, label in ((0, "uniform"), (2, "successive-rejects")):
        bench(
            f"episode regrets {label} ({args.reps}xT{T})",
            with_out(lambda o, c=code: nb.episode_regrets(
                c, means, prior, False, zeros, zeros, T, normals, pulls, o
            ), args.reps),
            with_out(lambda o, c=code: npk.episode_regrets(
                c, means, prior, False, zeros, zeros, T, normals, pulls, o
            ), args.reps),
            3,
        )

    env = 4.0 * np.sqrt(np.log(101.0)) * np.sqrt(
        np.concatenate([np.cumsum((1.0 / np.arange(1, 50) ** 2)[::-1])[::-1], [0.0]])
    )
    ev = rng.standard_normal((args.reps, 50))
    bench(
        f"event flags ({args.reps}x50)",
        with_out(lambda o: nb.event_flags(ev, 1.0 / 101.0**2, env, o), args.reps, np.int64),
        with_out(lambda o: npk.event_flags(ev, 1.0 / 101.0**2, env, o), args.reps, np.int64),
        3,
    )

    print(f"{'kernel':<44} {'compiled':>10} {'numpy':>10} {'speedup':>8} {'max diff':>9}")
    for name, t_nb, t_np, speedup, gap in rows:
        print(f"{name:<44} {t_nb * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms {speedup:>7.1f}x {gap:>9.1e}")


if __name__ == "__main__":
    main()
