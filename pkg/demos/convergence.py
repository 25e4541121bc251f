"""Manufactured-solution orders and energy-defect ratios on the smooth case.

    python3 demos/convergence.py [--levels K] [--out DIR]
"""

import argparse
from pathlib import Path

from nsacvdw.cli import main

HERE = Path(__file__).resolve().parent

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--out", default=str(HERE / "out" / "convergence"))
    args = ap.parse_args()
    raise SystemExit(main(["converge", "--config", str(HERE / "configs" / "smooth_nsac.json"),
                           "--levels", str(args.levels), "--out", args.out]))
