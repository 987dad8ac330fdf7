"""Weyl sums on major and minor arcs for d = 2, r = 4, P = 32, eps = 0.25 (about 1.5 minutes)."""

import argparse
import sys

from nilradon.cli import main

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--out", default="runs/arc_scan")
p.add_argument("--P", type=int, default=32)
args = p.parse_args()

sys.exit(main(["weyl-scan", "--d", "2", "--r", "4", "--P", str(args.P), "--eps", "0.25",
               "--budget", str(10 ** 9), "--out", args.out]))
