"""Forced-response kernels: per-step gap between the literal and corrected series."""

import argparse

import numpy as np

from seqfrac import FracOrderPair, KernelVariant, SeriesOptions, Semilinear, SystemSpec
from seqfrac import solve_recursive, solve_semilinear_series


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alpha", type=float, default=0.6)
    p.add_argument("--beta", type=float, default=0.8)
    p.add_argument("--h", type=float, default=0.5)
    p.add_argument("--a1", type=float, default=-0.6, help="scalar system coefficient")
    p.add_argument("--gamma", type=float, default=1.0, help="constant forcing")
    p.add_argument("-N", type=int, default=12)
    args = p.parse_args()

    spec = SystemSpec(1, FracOrderPair(args.alpha, args.beta), args.h, args.N,
                      Semilinear([[args.a1]], args.gamma), [1.0], [0.0])
    ref = solve_recursive(spec).states[:, 0]
    cor = solve_semilinear_series(spec).states[:, 0]
    lit = solve_semilinear_series(spec, SeriesOptions(kernel_variant=KernelVariant.LITERAL)).states[:, 0]
    c = args.h ** (args.alpha + args.beta)
    predicted = c * (1.0 / (1.0 - c * args.a1) - 1.0) * args.gamma
    print(f"{'n':>3} {'recursion':>14} {'corrected-ref':>14} {'literal-ref':>14}")
    for n in range(args.N + 1):
        print(f"{n:>3} {ref[n]:>14.8f} {cor[n] - ref[n]:>14.2e} {lit[n] - ref[n]:>14.6e}")
    print(f"closed-form literal gap at n=1: {predicted:.6e}")


if __name__ == "__main__":
    main()
