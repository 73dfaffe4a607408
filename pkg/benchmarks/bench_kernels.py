"""Compare the compiled and numpy scan kernels on synthetic timelines.

    python benchmarks/bench_kernels.py --chunks 6 --partials 4 6 8 10

Each row scans ``partials ** chunks`` compositions with both backends,
checks that they return identical fronts and prints the best-of-N times.
"""

import argparse
import sys
import time

import numpy as np

from crowdcharge import kernels


def synthetic_inputs(chunks: int, partials: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    n = chunks * partials
    minutes = rng.integers(2, 20, size=n).astype(float)
    dec = minutes / 60 * rng.uniform(100, 3000, size=n) * rng.uniform(0.7, 1.0, size=n)
    rel = rng.uniform(0, 1, size=n)
    return dec, dec * minutes * rel, dec * minutes, np.ones(n), np.full(chunks, partials)


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--chunks", type=int, default=6)
    parser.add_argument("--partials", type=int, nargs="+", default=[3, 4, 6, 8, 10])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    if "cython" not in kernels.BACKENDS:
        print("compiled kernel not built; only the numpy fallback is available", file=sys.stderr)
        return 1
    py, cy = kernels.BACKENDS["python"], kernels.BACKENDS["cython"]
    print(f"{'candidates':>12} {'numpy s':>10} {'cython s':>10} {'speedup':>8}")
    for p in args.partials:
        a, b, c, real, counts = synthetic_inputs(args.chunks, p)
        total = float(a.sum())
        call = (a, b, c, real, counts, total * 0.8, 60.0, 900.0, 120.0, 30.0)
        out_py, out_cy = py(*call), cy(*call)
        same = out_py[:2] == out_cy[:2] and out_py[4] == out_cy[4] and all(
            np.array_equal(np.sort(x), np.sort(y)) for x, y in zip(out_py[2:4], out_cy[2:4])
        )
        if not same:
            print(f"backends disagree at {p} partials per chunk", file=sys.stderr)
            return 1
        t_py = best_time(lambda: py(*call), args.repeat)
        t_cy = best_time(lambda: cy(*call), args.repeat)
        print(f"{p ** args.chunks:>12} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
