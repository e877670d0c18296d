"""Benchmark the sweep kernels: numba @njit vs the pure-numpy fallback.

The dispatch flag is flipped in-process via ANISOCHECK_DISABLE_NUMBA, so
both paths run on identical inputs.  The first numba call compiles (or
loads the on-disk cache) and is excluded by a warm-up pass.

Usage:  python benchmarks/bench_sweeps.py [--samples N] [--repeat K]
"""

import argparse
import os
import time

from anisocheck import inequalities as iq
from anisocheck._jit import HAVE_NUMBA


def timed(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=1_000_000,
                    help="sample count for the constrained sweeps")
    ap.add_argument("--grids", type=int, nargs=3, default=[200, 200, 720],
                    metavar=("NA", "NB", "NANGLE"),
                    help="grid of the quadratic form comparison sweep")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    cases = {
        "quadratic_lemma": lambda: iq.verify_quadratic_lemma(*args.grids),
        "curvature_pinch": lambda: iq.verify_curvature_pinch(args.samples, seed=1234),
        "ricci_bound": lambda: iq.verify_ricci_bound(args.samples, seed=1234),
    }

    if HAVE_NUMBA:
        os.environ["ANISOCHECK_DISABLE_NUMBA"] = "0"
        for fn in cases.values():
            fn()  # warm-up: compile or load the cached kernels
    else:
        print("numba not importable; timing the numpy path only")

    print(f"{'sweep':18s} {'numba':>10s} {'numpy':>10s} {'speedup':>9s}  worst margins agree")
    for name, fn in cases.items():
        if HAVE_NUMBA:
            os.environ["ANISOCHECK_DISABLE_NUMBA"] = "0"
            t_nb, rep_nb = timed(fn, args.repeat)
        else:
            t_nb, rep_nb = float("nan"), None
        os.environ["ANISOCHECK_DISABLE_NUMBA"] = "1"
        t_np, rep_np = timed(fn, args.repeat)
        os.environ["ANISOCHECK_DISABLE_NUMBA"] = "0"
        if rep_nb is None:
            print(f"{name:18s} {'-':>10s} {t_np:9.3f}s {'-':>9s}")
            continue
        agree = all(abs(a.margin - b.margin) <= 1e-14
                    for a, b in zip(rep_nb.records, rep_np.records))
        print(f"{name:18s} {t_nb:9.3f}s {t_np:9.3f}s {t_np / t_nb:8.1f}x  {agree}")


if __name__ == "__main__":
    main()
