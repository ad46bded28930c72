#!/usr/bin/env python3
"""Scan the coherent-cat family for Bell-functional violations vs mode count.

For each n the best lhs/rhs ratio over an |alpha| grid is reported; ratios
above 1 would mark a violation. For comparison the Fock-pair family
(|1..10..0> + |0..01..1>)/sqrt(2) is evaluated at the balanced split, which
crosses ratio 1 at ten modes.
"""

import argparse
import sys

from cvbell import (QuadratureSettings, cfrd_evaluate, default_alpha_grid,
                    make_fock_pair, scan_cat_family)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-min", type=int, default=1)
    ap.add_argument("--n-max", type=int, default=10)
    ap.add_argument("--alpha-points", type=int, default=60)
    ap.add_argument("--sign", type=int, default=1, choices=[1, -1])
    args = ap.parse_args()

    grid = default_alpha_grid(args.alpha_points)
    print("cat family (best over alpha grid):")
    print("  n   alpha    ratio      beta")
    for row in scan_cat_family(range(args.n_min, args.n_max + 1), grid,
                               sign=args.sign):
        print(f"  {row.n:2d}  {abs(row.alpha):6.3f}  {row.ratio:9.6f}  "
              f"{row.beta:+.4e}")

    print("fock-pair family (balanced split):")
    print("  n   ratio      beta")
    for n in range(2, args.n_max + 1, 2):
        state = make_fock_pair(n, range(n // 2))
        signs = tuple([1] * (n // 2) + [-1] * (n - n // 2))
        rep = cfrd_evaluate(state, QuadratureSettings(
            (0.0,) * n, (0.0,) * n, signs), expand_s_squared=False)
        mark = "  <-- violation" if rep.violated else ""
        print(f"  {n:2d}  {rep.lhs / rep.rhs:9.6f}  {rep.beta:+.4e}{mark}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
