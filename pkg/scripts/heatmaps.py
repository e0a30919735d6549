"""Alpha-optimized success over the (eta, cutoff) lattice for each protocol.

The full lattice (eta 0.5..1.0 by 0.05, cutoff 0.5..1.0 by 0.025, alpha scan
by 0.05) takes a few minutes per protocol on one core; set CATLINK_THREADS
to spread the alpha scan over threads.

Usage: python scripts/heatmaps.py [--out figures] [--protocols mod2 mod4 mod4p]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from catlink.analysis import heatmap, parse_range


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("figures"))
    ap.add_argument("--protocols", nargs="+", default=["mod2", "mod4", "mod4p"])
    ap.add_argument("--eta-grid", default="0.5:1.0:0.05")
    ap.add_argument("--cutoff-grid", default="0.5:1.0:0.025")
    ap.add_argument("--step", type=float, default=0.05)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    etas, cutoffs = parse_range(args.eta_grid), parse_range(args.cutoff_grid)
    for proto in args.protocols:
        hm = heatmap(proto, etas, cutoffs, step=args.step,
                     progress=lambda e, p=proto: print(f"{p} eta={e:g}", file=sys.stderr))
        path = args.out / f"heatmap_{proto}.csv"
        np.savetxt(path, hm.log10, fmt="%.6g", delimiter=",",
                   header="rows: eta " + args.eta_grid + "; cols: cutoff " + args.cutoff_grid,
                   comments="# ")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
