"""Sum-norm growth and internal inequalities for every shipped operator family."""

import argparse
import sys

from nilradon.cli import main
from nilradon.ortho import GENERATORS

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--out", default="runs/ortho")
p.add_argument("--K", default="4,8,12")
args = p.parse_args()

code = 0
for name in GENERATORS:
    code = max(code, main(["ortho-demo", "--generator", name, "--K", args.K,
                           "--out", f"{args.out}/{name}"]))
sys.exit(code)
