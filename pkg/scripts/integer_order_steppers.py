"""At alpha = beta = 1, compare both forcing lags with the two Euler-type steppers."""

import argparse

import numpy as np

from seqfrac import FracOrderPair, Semilinear, SystemSpec, solve_recursive


def euler(spec, semi_implicit):
    x, y = spec.x_a.copy(), spec.x_0.copy()
    out = [x.copy()]
    for n in range(spec.horizon):
        f = spec.f(n, x)
        if semi_implicit:
            y = y + spec.h * f
            x = x + spec.h * y
        else:
            x, y = x + spec.h * y, y + spec.h * f
        out.append(x.copy())
    return np.array(out)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("-N", type=int, default=1000)
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    d = 3
    spec = SystemSpec(d, FracOrderPair(1.0, 1.0), args.h, args.N,
                      Semilinear(rng.uniform(-1, 1, (d, d)), rng.uniform(-1, 1, (args.N + 1, d))),
                      rng.uniform(-1, 1, d), rng.uniform(-1, 1, d))
    for lag in (1, 2):
        states = solve_recursive(spec, forcing_lag=lag).states
        for name, semi in (("explicit", False), ("semi-implicit", True)):
            ref = euler(spec, semi)
            err = np.max(np.abs(states - ref) / np.maximum(1, np.abs(ref)))
            print(f"forcing lag {lag} vs {name:<13} Euler: max rel err {err:.2e}")


if __name__ == "__main__":
    main()
