"""Total success probability against alpha for a set of cutoffs.

Produces the data of the success-rate panels: mod2 and mod4 at perfect and
eta = 0.8 efficiency, and mod4 with individual parities at eta = 0.8.

Usage: python scripts/success_curves.py [--out figures] [--step 0.05]
"""

import argparse
from pathlib import Path

import numpy as np

from catlink.analysis import alpha_scan, coarse_alphas

PANELS = [("mod2", 1.0), ("mod2", 0.8), ("mod4", 1.0), ("mod4", 0.8), ("mod4p", 0.8)]
CUTOFFS = np.round(np.arange(0.5, 1.0001, 0.05), 10)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("figures"))
    ap.add_argument("--step", type=float, default=0.05)
    ap.add_argument("--max-alpha", type=float, default=3.0)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    alphas = coarse_alphas((0.0, args.max_alpha), args.step)
    for enc, eta in PANELS:
        table = alpha_scan(enc, eta, eta, CUTOFFS, alphas)
        path = args.out / f"success_{enc}_eta{eta:g}.csv"
        header = "alpha," + ",".join(f"Fc_{c:g}" for c in CUTOFFS)
        np.savetxt(path, np.column_stack([alphas, table]), fmt="%.12g", delimiter=",",
                   header=header, comments="")
        best = alphas[np.argmax(table[:, list(CUTOFFS).index(0.75)])]
        print(f"{path}: best alpha at F_c=0.75 on the scan grid = {best:.2f}")


if __name__ == "__main__":
    main()
