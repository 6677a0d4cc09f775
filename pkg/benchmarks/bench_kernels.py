"""Time the per-iteration buyer kernel: numba loops vs vectorised numpy.

    python benchmarks/bench_kernels.py [--sizes 10x10,100x100,1000x1000] [--reps 200]
"""
import argparse
import time

import numpy as np

from pfet import _jit, kernels
from pfet.bench import parse_sizes


def _time(fn, args, reps):
    fn(*args)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - t0) / reps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="10x10,50x50,200x200,1000x1000")
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _jit.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    print(f"{'size':>11} {'numpy us':>10} {'numba us':>10} {'speedup':>8}")
    for ns, nb in parse_sizes(args.sizes):
        prices = rng.uniform(4, 20, ns)
        states = rng.dirichlet(np.ones(ns))
        lam = np.full(nb, 20.1)
        theta = np.full(nb, 0.5)
        call = (prices, states, lam, theta, 1e-4)
        t_np = _time(kernels.buyer_round_numpy, call, args.reps)
        t_nb = _time(kernels.buyer_round_numba, call, args.reps)
        print(f"{ns:>5}x{nb:<5} {t_np * 1e6:10.1f} {t_nb * 1e6:10.1f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
