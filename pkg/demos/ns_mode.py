"""Pure Navier-Stokes run with constant conductivity, then its monitors.

    python3 demos/ns_mode.py [--out DIR]
"""

import argparse
from pathlib import Path

from nsacvdw.cli import main

HERE = Path(__file__).resolve().parent

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--out", default=str(HERE / "out" / "ns_beta0"))
    args = ap.parse_args()
    code = main(["run", "--config", str(HERE / "configs" / "ns_beta0.json"), "--out", args.out])
    raise SystemExit(code or main(["check", args.out]))
