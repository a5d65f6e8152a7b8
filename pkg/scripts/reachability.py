#!/usr/bin/env python3
"""Exhaustively enumerate which coverage points of a bundled design can ever fire."""
import argparse

from hwfuzz.designs import DESIGNS, load_design
from hwfuzz.sim.explore import reachable_points


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("designs", nargs="*", default=list(DESIGNS))
    ap.add_argument("--max-input-bits", type=int, default=20)
    args = ap.parse_args()
    for name in args.designs:
        nl = load_design(name)
        hit = reachable_points(nl, max_input_bits=args.max_input_bits, stop_at=len(nl.cov_points))
        missing = sorted(set(range(len(nl.cov_points))) - hit)
        print(f"{name:16} {len(hit)}/{len(nl.cov_points)} points reachable"
              + (f", never: {missing}" if missing else ""))


if __name__ == "__main__":
    main()
