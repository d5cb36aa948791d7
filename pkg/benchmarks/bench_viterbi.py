"""Compare the numba and pure-numpy Viterbi backends.

    python3 benchmarks/bench_viterbi.py [--n 10000] [--k 4 6 8] [--repeat 3]

Both backends run the same float operations, so besides timing each pass
the script checks that they return identical reconstructions and costs.
"""
import argparse
import time

import numpy as np

from slopecoder._accel import NUMBA_AVAILABLE
from slopecoder.cost import coeffs_from_counts
from slopecoder.empirical import count_matrix
from slopecoder.viterbi import viterbi_solve


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--k", type=int, nargs="+", default=[4, 6, 8])
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not NUMBA_AVAILABLE:
        print("numba is not installed; only the numpy backend can run")
    rng = np.random.default_rng(args.seed)
    x = rng.integers(0, 2, args.n)
    print(f"{'k':>3} {'states':>7} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}  identical")
    for k in args.k:
        lam = coeffs_from_counts(count_matrix(x, k, "linear"))
        t_np, (y_np, c_np) = best_of(lambda: viterbi_solve(x, lam, args.alpha, backend="numpy"), args.repeat)
        if NUMBA_AVAILABLE:
            viterbi_solve(x[: k + 2], lam, args.alpha, backend="numba")  # compile outside the timing
            t_nb, (y_nb, c_nb) = best_of(lambda: viterbi_solve(x, lam, args.alpha, backend="numba"), args.repeat)
            same = bool(np.array_equal(y_np, y_nb) and c_np == c_nb)
            print(f"{k:>3} {2 ** (k + 1):>7} {t_np * 1e3:>10.1f} {t_nb * 1e3:>10.1f} {t_np / t_nb:>7.1f}x  {same}")
        else:
            print(f"{k:>3} {2 ** (k + 1):>7} {t_np * 1e3:>10.1f} {'-':>10} {'-':>8}  -")


if __name__ == "__main__":
    main()
