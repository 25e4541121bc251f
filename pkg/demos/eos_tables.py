"""Isotherm tables and the coexistence analysis in reduced units.

    python3 demos/eos_tables.py [--out DIR]
"""

import argparse
from pathlib import Path

from nsacvdw.cli import main

HERE = Path(__file__).resolve().parent

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--out", default=str(HERE / "out" / "eos"))
    args = ap.parse_args()
    code = main(["eos", "--config", str(HERE / "configs" / "eos_reduced.json"),
                 "--out", args.out])
    print((Path(args.out) / "analysis.csv").read_text())
    raise SystemExit(code)
