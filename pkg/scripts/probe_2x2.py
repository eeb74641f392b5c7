#!/usr/bin/env python3
"""Exhaustive ratio x time probe of rotation-symmetric 2x2 couplings.

Scans the coupling ratio of the two rotation orbits against a dense time grid
and records the observed supremum of the worst-case mirrored modulus. The
result is numerical evidence about the landscape, not a proof.
"""

import argparse
import os
import sys

from spinmirror.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="out/probe")
    ap.add_argument("--ratios", type=int, default=200)
    ap.add_argument("--times", type=int, default=2000)
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    return cli_main(
        [
            "optimize",
            "--preset", "rodot-2x2-probe",
            "--ratios", str(args.ratios),
            "--times", str(args.times),
            "--out", os.path.join(args.outdir, "probe-2x2"),
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
