#!/usr/bin/env python3
"""Run every engine on one bundled design and plot statement coverage over time.

    python scripts/compare_engines.py fsm_lock --secs 60 --out runs/
"""
import argparse
from pathlib import Path

from hwfuzz.config import FuzzConfig
from hwfuzz.designs import DESIGNS, load_design
from hwfuzz.fuzz import run_campaign
from hwfuzz.fuzz.engines import ENGINES
from hwfuzz.report import emit_plot


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("design", choices=DESIGNS)
    ap.add_argument("--secs", type=float, default=60.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="runs")
    ap.add_argument("--x", choices=("wall_ms", "execs"), default="wall_ms")
    args = ap.parse_args()

    nl = load_design(args.design)
    root = Path(args.out) / args.design
    series = []
    for engine in ENGINES:
        cfg = FuzzConfig(engine=engine, duration_secs=args.secs, rng_seed=args.seed)
        res = run_campaign(nl, None, cfg, root / engine)
        s = res.stats
        full = next((x for x in s.samples if x.stmt_pct >= 100.0), None)
        when = f"{full.wall_ms} ms" if full else "never"
        print(f"{engine:9} execs {s.execs:7}  stmt {s.stmt_pct:6.2f}%  branch {s.branch_pct:6.2f}%  "
              f"crashes {s.unique_crashes}  100% stmt at {when}")
        series.append((engine, s.samples))
    svg = emit_plot(series, root / "coverage.svg", args.x)
    print(f"plot: {svg}")


if __name__ == "__main__":
    main()
