"""Wall-clock cost of the memory recursion against horizon length."""

import argparse
import time

import numpy as np

from seqfrac import FracOrderPair, Semilinear, SystemSpec, solve_recursive


def build(N, dim, rng):
    A = rng.uniform(-1, 1, (dim, dim)) * 0.01
    return SystemSpec(dim, FracOrderPair(0.5, 0.7), 0.01, N, Semilinear(A, rng.uniform(-1, 1, (N + 1, dim))),
                      rng.uniform(0, 1, dim), rng.uniform(0, 1, dim))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--sizes", type=int, nargs="+", default=[1000, 2000, 4000, 8000, 10000])
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    solve_recursive(build(3, args.dim, rng))  # compile
    times = []
    for N in args.sizes:
        spec = build(N, args.dim, rng)
        best = min(_timed(spec) for _ in range(args.repeats))
        times.append(best)
        print(f"N={N:>6}  {best:.4f}s")
    slope = np.polyfit(np.log(args.sizes), np.log(times), 1)[0]
    print(f"fitted exponent p = {slope:.2f}")


def _timed(spec):
    t0 = time.perf_counter()
    solve_recursive(spec)
    return time.perf_counter() - t0


if __name__ == "__main__":
    main()
