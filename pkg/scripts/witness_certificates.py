#!/usr/bin/env python3
"""Batch impossibility certificates over lattice sizes and pattern seeds.

For each lattice side N the witness on the diagonal state |10...0> is checked
against a batch of random diagonally symmetric patterns; every certificate
should come back "impossible".
"""

import argparse
import os
import sys

from spinmirror.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="out/witness")
    ap.add_argument("--n-min", type=int, default=2)
    ap.add_argument("--n-max", type=int, default=4)
    ap.add_argument("--seeds", default="0,1,2,3,4,5,6,7")
    ap.add_argument("--pattern", choices=("uniform", "random-rx"), default="random-rx")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    worst = 0
    for n in range(args.n_min, args.n_max + 1):
        prefix = os.path.join(args.outdir, f"witness-n{n}")
        code = cli_main(
            [
                "witness",
                "--n", str(n),
                "--pattern", args.pattern,
                "--seeds", args.seeds,
                "--out", prefix,
            ]
        )
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
