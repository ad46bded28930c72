#!/usr/bin/env python3
"""Randomized sweep checking that every violation is flagged NPT.

Draws (state, settings) pairs on a small dense lattice, evaluates the Bell
functional, and asserts the implication chain: violated -> negative moment
minor -> negative partial-transpose eigenvalue. Prints a summary table and
exits nonzero if any pair breaks the chain.
"""

import argparse
import math
import sys
import time

import numpy as np

from cvbell import (ModeSpec, QuadratureSettings, cfrd_evaluate,
                    partial_transpose_min_eig, random_state)


def random_settings(rng, n):
    thetas = tuple(rng.uniform(0, 2 * math.pi, n))
    deltas = tuple(rng.uniform(-1.2, 1.2, n))
    while True:
        signs = tuple(int(s) for s in rng.choice([1, -1], n))
        if len(set(signs)) > 1:
            return QuadratureSettings(thetas, deltas, signs)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=500, help="pairs per mode count")
    ap.add_argument("--modes", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--cutoff", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    bad = 0
    t0 = time.perf_counter()
    for n in args.modes:
        violations = 0
        for _ in range(args.pairs):
            kind = "pure" if rng.random() < 0.5 else "mixed"
            state = random_state(ModeSpec(n, args.cutoff), kind, headroom=3,
                                 seed=int(rng.integers(1 << 31)))
            rep = cfrd_evaluate(state, random_settings(rng, n))
            if rep.violated:
                violations += 1
                pt = partial_transpose_min_eig(state, rep.bipartition)
                if rep.minor_d >= 0 or pt.min_eigenvalue >= 0:
                    bad += 1
                    print(f"  BROKEN: n={n} beta={rep.beta:.3e} "
                          f"minor={rep.minor_d:.3e} pt={pt.min_eigenvalue:.3e}")
        print(f"n={n}: {args.pairs} pairs, {violations} violations, "
              f"{bad} inconsistencies")
    print(f"done in {time.perf_counter() - t0:.1f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
