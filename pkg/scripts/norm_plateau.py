"""Norm lower bounds of the truncated Hilbert-type operator for d = 1, 2 over R = 2^6, 2^8, 2^10."""

import argparse
import sys

from nilradon.cli import main

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--out", default="runs/norm_plateau")
p.add_argument("--kernel", default="hilbert")
args = p.parse_args()

code = 0
for d in (1, 2):
    code = max(code, main(["norm-sweep", "--d", str(d), "--kernel", args.kernel,
                           "--R", "64,256,1024", "--out", f"{args.out}/d{d}"]))
sys.exit(code)
