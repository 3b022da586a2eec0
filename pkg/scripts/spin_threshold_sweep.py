"""Directional robustness of the three Pauli POVMs against the unit-sphere prediction.

For a direction u the predicted robustness is 1/||u||_2.
    python3 scripts/spin_threshold_sweep.py --samples 50 --seed 1
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from compatdim.compat import noise_robustness
from compatdim.constructions import spin_level_bounds, spin_povms
from compatdim.io import fmt


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-level", type=int, default=6, help="bookkeeping table up to this level")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    paulis = spin_povms(1)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["u1", "u2", "u3", "robustness", "predicted", "abs_error"])
    worst = 0.0
    for _ in range(args.samples):
        u = rng.uniform(1e-3, 1, 3)
        u /= u.max()
        t = noise_robustness(paulis, u)
        pred = 1 / np.linalg.norm(u)
        worst = max(worst, abs(t - pred))
        w.writerow([fmt(x) for x in u] + [fmt(t), fmt(pred), fmt(abs(t - pred))])
    print(f"worst |t* - 1/||u|||: {worst:.2e}", file=sys.stderr)

    # larger levels: bound bookkeeping only, no SDP
    for k in range(1, args.max_level + 1):
        b = spin_level_bounds(k, 1 / np.sqrt(2 * k + 1) + 1e-3, 2)
        print(f"level {k}: dim {2 ** k}, {b}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
