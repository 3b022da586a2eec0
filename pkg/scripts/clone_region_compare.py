"""Compare the boundary-formula membership with the Choi SDP on a grid.

    python3 scripts/clone_region_compare.py --g 2 --d 3 --grid 21
"""
from __future__ import annotations

import argparse
import itertools
import sys

import numpy as np

from compatdim.cloning import clone_choi_feasible, in_gamma_clone


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--g", type=int, default=2)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--grid", type=int, default=21)
    ap.add_argument("--band", type=float, default=1e-3, help="skip points this close to the boundary")
    args = ap.parse_args(argv)

    grid = np.linspace(0, 1, args.grid)
    agree = skipped = 0
    bad = []
    for p in itertools.product(grid, repeat=args.g):
        s = np.array(p)
        mem = in_gamma_clone(s, args.d)
        if np.isfinite(mem.alpha_star) and mem.alpha_star > 0:
            if np.linalg.norm(s) * abs(1 - 1 / mem.alpha_star) <= args.band:
                skipped += 1
                continue
        if clone_choi_feasible(s, args.d).feasible == mem.member:
            agree += 1
        else:
            bad.append(p)
    print(f"g={args.g} d={args.d}: {agree} agree, {len(bad)} disagree, {skipped} near the boundary")
    for p in bad[:20]:
        print("  disagree at", ", ".join(f"{x:.3f}" for x in p))
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
