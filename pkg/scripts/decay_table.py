"""Table of max_a |S(a/q)| for d = 2, r = 2, q <= 20, with the q = 2 witness spelled out."""

import argparse
import sys

from nilradon.cli import main
from nilradon.expsums import MultiFraction, S_aq

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--out", default="runs/decay_table")
p.add_argument("--qmax", type=int, default=20)
args = p.parse_args()

for r in (1, 2, 3):
    print(f"S((1, 1, 0)/2), r={r}:", S_aq(MultiFraction(2, (1, 1, 0)), r))
sys.exit(main(["expsum-table", "--d", "2", "--r", "2", "--qmax", str(args.qmax),
               "--budget", str(10 ** 9), "--out", args.out]))
