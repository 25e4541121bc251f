"""Spinodal decomposition of an elliptic bump, then every diagnostic.

    python3 demos/phase_transition.py [--out DIR]
"""

import argparse
from pathlib import Path

import numpy as np

from nsacvdw.cli import main, parse_config
from nsacvdw.eos import maxwell_construction

HERE = Path(__file__).resolve().parent
CONFIG = HERE / "configs" / "phase_transition.json"


def summarize(out):
    spec = parse_config(CONFIG)
    last = sorted(Path(out).glob("snap_*.csv"))[-1]
    snap = np.genfromtxt(last, delimiter=",", names=True)
    m = maxwell_construction(spec.params, spec.far.theta_bar)
    print(f"coexistence volumes at theta={spec.far.theta_bar}: "
          f"{m.v_star:.4f} and {m.v_sup:.4f} (p_eq={m.p_eq:.4g})")
    print(f"final v range: [{snap['v'].min():.4f}, {snap['v'].max():.4f}]")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--out", default=str(HERE / "out" / "phase_transition"))
    args = ap.parse_args()
    code = main(["run", "--config", str(CONFIG), "--out", args.out])
    if code == 0:
        code = main(["check", args.out])
        summarize(args.out)
    raise SystemExit(code)
