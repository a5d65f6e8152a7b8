#!/usr/bin/env python3
"""Measure raw simulation throughput (testcases per second) on the bundled designs."""
import argparse
import random
import time

from hwfuzz.designs import DESIGNS, load_design
from hwfuzz.sim import RunConfig, run_testcase
from hwfuzz.stimulus import frame_size


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=2000)
    ap.add_argument("--frames", type=int, default=16)
    args = ap.parse_args()
    rng = random.Random(0)
    for name in DESIGNS:
        nl = load_design(name)
        n = frame_size(nl.spec) * args.frames
        inputs = [rng.randbytes(n) for _ in range(args.runs)]
        t0 = time.perf_counter()
        cycles = 0
        for data in inputs:
            cycles += run_testcase(nl, data, RunConfig()).cycles_run
        dt = time.perf_counter() - t0
        print(f"{name:16} {args.runs / dt:8.0f} runs/s  {cycles / dt:9.0f} cycles/s")


if __name__ == "__main__":
    main()
