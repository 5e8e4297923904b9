"""Local positivity criterion versus sampled trajectories on random 2x2 systems."""

import argparse

import numpy as np

from seqfrac import FracOrderPair, Semilinear, SystemSpec
from seqfrac.positivity import local_positivity_criterion, nonneg_rhs_positivity_check


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--systems", type=int, default=200)
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--tau", type=int, default=10)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    o, h = FracOrderPair(0.6, 0.8), 0.5
    table = {}
    for _ in range(args.systems):
        A = rng.uniform(-3, 1, (2, 2))
        local = local_positivity_criterion(A, o, h).ok
        spec = SystemSpec(2, o, h, args.tau, Semilinear(A, 0.0), [0.0, 0.0], [0.0, 0.0])
        rep = nonneg_rhs_positivity_check(spec, args.samples, args.tau, seed=int(rng.integers(2**31)))
        key = (local, rep.ok if rep.ok else ("held" if rep.hypothesis_held else "not held"))
        table[key] = table.get(key, 0) + 1
    print("local criterion | sampled verdict over tau steps | count")
    for (local, verdict), count in sorted(table.items(), key=str):
        v = "no violation" if verdict is True else f"violation, f>=0 {verdict}"
        print(f"{str(local):>15} | {v:<30} | {count}")


if __name__ == "__main__":
    main()
