"""Scan every truncation index of random instances.

For each instance, lists the co-feasible indices and those that are also
admissible; reports any instance where the admissible set is not exactly
the minimal co-feasible index, and the distribution of that index.

    python3 scripts/uniqueness_scan.py --instances 5000 --grid 0.25
"""
import argparse
import collections
import sys
import warnings
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from _gen import instance  # noqa: E402
from gfod import core  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=2000)
    ap.add_argument("--d-max", type=int, default=8)
    ap.add_argument("--k-max", type=int, default=12)
    ap.add_argument("--grid", type=float, default=None, help="round data to this grid to force ties")
    ap.add_argument("--rng", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.rng)
    hist = collections.Counter()
    bad = degenerate = 0
    for _ in range(args.instances):
        inst = instance(rng, d_max=args.d_max, k_max=args.k_max, k_at_least_d=True, grid=args.grid)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", core.DegenerateInstanceWarning)
            r = core.minimal_cofeasible_index(inst)
        degenerate += bool(caught)
        good = [q for q in core.cofeasible_indices(inst) if core.is_admissible(inst, q)]
        hist[r] += 1
        if good != [r]:
            bad += 1
            print(f"lam={inst.lam.tolist()} a={inst.a.tolist()} minimal={r} admissible={good}")
    print(f"instances: {args.instances}, violations: {bad}, degenerate warnings: {degenerate}")
    print("minimal co-feasible index histogram:", dict(sorted(hist.items())))


if __name__ == "__main__":
    main()
