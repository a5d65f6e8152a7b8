"""Command-line front end.

Exit codes: 0 success, 2 a crash was found or reproduced, 1 any error.
Errors print one line, ``error[<category>]: <message>``, on stderr.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import HwFuzzError, SpecError
from .rtl import extract_spec, parse_files, read_spec_xml, write_spec_xml
from .sim import elaborate, elaborate_testbench, run_testbench, run_testcase, RunConfig
from .stimulus import frame_size

EXIT_OK, EXIT_ERROR, EXIT_CRASH = 0, 1, 2


class CliError(HwFuzzError):
    pass


def _infer_top(modules, top):
    if top:
        return top
    used = {i.module for m in modules for i in m.instances}
    roots = [m.name for m in modules if m.name not in used]
    if len(roots) != 1:
        raise SpecError("top-not-found", "cannot infer the top module; pass --top")
    return roots[0]


def _build(files, top=None, clock=None, reset=None):
    modules = parse_files(files)
    spec = extract_spec(modules, _infer_top(modules, top), clock, reset)
    return modules, spec, elaborate(modules, spec)


def _read_meta(path: Path) -> dict:
    out = {}
    if path.exists():
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.startswith("---"):
                continue
            k, sep, v = line.partition(":")
            if sep and k.strip() not in out and v.strip() != "None":
                out[k.strip()] = v.strip()
    return out


def _crash_line(info) -> str:
    what = f"assertion {info.assertion}" if info.kind == "assertion" else f"trap {info.kind}"
    return f"crash: {what} at cycle {info.cycle}: {info.message}"


# -- subcommands -----------------------------------------------------------------

def cmd_parse(args) -> int:
    modules, spec, nl = _build(args.files, args.top, args.clock, args.reset)
    print(f"top: {spec.top}  clock: {spec.clock}  reset: {spec.reset} (active {spec.reset_polarity})")
    for p in spec.ports:
        print(f"  {p.direction:6} {p.width:3}  {p.name}")
    print(f"stimulus: {spec.stimulus_width} bits, {frame_size(spec)} byte(s) per frame")
    print(f"coverage points: {nl.n_statement_points} statement, {nl.n_branch_points} branch; "
          f"assertions: {len(nl.assertions)}")
    if args.emit_spec:
        Path(args.emit_spec).write_text(write_spec_xml(spec), encoding="utf-8", newline="\n")
    return EXIT_OK


def cmd_fuzz(args) -> int:
    from .fuzz import load_dict, load_seeds, run_campaign
    cfg = load_config(args.config)
    if args.out:
        cfg.out_dir = args.out
    _, spec, nl = _build(args.files, args.top or cfg.top, cfg.clock, cfg.reset)
    seeds = load_seeds(cfg.corpus_dir) if cfg.corpus_dir else None
    tokens = load_dict(cfg.dict) if cfg.dict else ()
    res = run_campaign(nl, seeds, cfg, out_dir=cfg.out_dir, tokens=tokens)
    s = res.stats
    print(f"engine {s.engine}: {s.execs} execs in {s.wall_ms / 1000:.1f}s "
          f"({s.execs_per_sec:.0f}/s), corpus {s.corpus_size}, unique crashes {s.unique_crashes}")
    print(f"coverage: stmt {s.stmt_pct:.2f}%  branch {s.branch_pct:.2f}%  -> {cfg.out_dir}")
    return EXIT_CRASH if s.unique_crashes else EXIT_OK


def _run_cfg(args, meta=None):
    meta = meta or {}
    rc = args.reset_cycles if args.reset_cycles is not None else int(meta.get("reset_cycles", 2))
    mc = args.max_cycles if args.max_cycles is not None else int(meta.get("max_cycles", 256))
    return RunConfig(rc, mc, trace=bool(getattr(args, "vcd", None)))


def _emit_vcd(nl, res, path):
    from .sim.vcd import emit_vcd
    Path(path).write_text(emit_vcd(nl, res.trace), encoding="utf-8", newline="\n")


def cmd_simulate(args) -> int:
    _, spec, nl = _build(args.files, args.top, args.clock, args.reset)
    data = Path(args.input).read_bytes()
    res = run_testcase(nl, data, _run_cfg(args))
    if args.vcd:
        _emit_vcd(nl, res, args.vcd)
    outs = " ".join(f"{k}=0x{v:X}" for k, v in res.outputs.items())
    if res.crashed:
        print(_crash_line(res.crash_info))
        print(f"cycles: {res.cycles_run}  outputs: {outs}")
        return EXIT_CRASH
    print(f"completed: {res.cycles_run} cycles  outputs: {outs}")
    return EXIT_OK


def cmd_replay(args) -> int:
    from .harness import gen_replay_tb, replay_key
    from .fuzz.campaign import CrashRecord, parse_crash_meta
    crash_path = Path(args.crash)
    data = crash_path.read_bytes()
    camp = _read_meta(crash_path.parent.parent / "campaign.meta")
    modules, spec, nl = _build(args.files, args.top or camp.get("top"), camp.get("clock") or None,
                               camp.get("reset") or None)
    cfg = _run_cfg(args, camp)
    res = run_testcase(nl, data, cfg)
    if args.vcd:
        _emit_vcd(nl, res, args.vcd)
    if not res.crashed:
        print(f"not reproduced: run completed after {res.cycles_run} cycles")
        return EXIT_OK
    info = res.crash_info
    key = f"{info.ident}:{res.last_point}"
    print(_crash_line(info))
    print(f"dedup key: {key}")
    meta_path = crash_path.with_name(crash_path.name + ".meta")
    if meta_path.exists():
        want = parse_crash_meta(meta_path.read_text(encoding="utf-8")).get("dedup_key")
        if want != key:
            raise CliError("replay-mismatch", f"recorded key {want} but replay gave {key}")
    if args.emit_tb:
        rec = CrashRecord(data, info.kind, info.ident, info.cycle, res.last_point, info.message)
        text = gen_replay_tb(spec, rec, cfg)
        Path(args.emit_tb).write_text(text, encoding="utf-8", newline="\n")
        from .rtl import parse
        tb_mods = list(modules) + [m for m in parse(text)]
        tb_nl = elaborate_testbench(tb_mods, f"{spec.top}_replay")
        tb_res = run_testbench(tb_nl, max_cycles=cfg.max_cycles)
        tb_key = replay_key(tb_nl, nl, tb_res)
        if tb_key is None or f"{tb_key[0]}:{tb_key[1]}" != key or tb_res.crash_info.cycle != info.cycle:
            raise CliError("replay-mismatch", f"testbench simulation gave {tb_key}, expected {key}")
        print(f"testbench: {args.emit_tb} (reproduces {key} at cycle {info.cycle})")
    return EXIT_CRASH


def cmd_report(args) -> int:
    from .report import emit_plot, merge_campaign_covs, read_csv
    series = []
    names = set()
    snaps = []
    for d in args.dirs:
        d = Path(d)
        csv_path = d / "stats.csv"
        if not csv_path.exists():
            raise CliError("io", f"{d}: no stats.csv")
        name = _read_meta(d / "campaign.meta").get("engine") or d.name
        if name in names:
            name = f"{name} ({d.name})"
        names.add(name)
        samples = read_csv(csv_path)
        series.append((name, samples))
        last = samples[-1] if samples else None
        if last:
            print(f"{name:24} execs {last.execs:8}  stmt {last.stmt_pct:6.2f}%  "
                  f"branch {last.branch_pct:6.2f}%  edges {last.edges:5}  crashes {last.crashes}")
        else:
            print(f"{name:24} (no samples)")
        if (d / "coverage.bin").exists():
            snaps.append(d / "coverage.bin")
    emit_plot(series, args.svg, args.x)
    print(f"plot: {args.svg} ({len(series)} series)")
    if args.merged:
        from .coverage import coverage_pct, dump_snapshot
        g = merge_campaign_covs(snaps)
        Path(args.merged).write_bytes(dump_snapshot(g))
        stmt, br = coverage_pct(g)
        print(f"merged: stmt {stmt:.2f}%  branch {br:.2f}% -> {args.merged}")
    return EXIT_OK


def cmd_gen_tb(args) -> int:
    from .harness import gen_replay_tb, gen_wrapper_tb
    spec = read_spec_xml(Path(args.spec).read_text(encoding="utf-8"))
    if args.kind == "wrapper":
        text = gen_wrapper_tb(spec)
    else:
        if not args.crash:
            raise CliError("usage", "--kind replay needs --crash")
        data = Path(args.crash).read_bytes()
        cfg = RunConfig(args.reset_cycles or 2, args.max_cycles or 256)
        text = gen_replay_tb(spec, data, cfg)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hwfuzz", description="Coverage-guided fuzzing of Verilog designs")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def design_args(p, top=True):
        p.add_argument("files", nargs="+", help="Verilog source files")
        if top:
            p.add_argument("--top", help="top module (inferred when unambiguous)")
        p.add_argument("--clock", help="clock port name hint")
        p.add_argument("--reset", help="reset port name hint")

    def cycle_args(p):
        p.add_argument("--reset-cycles", type=int)
        p.add_argument("--max-cycles", type=int)

    p = sub.add_parser("parse", help="extract the design interface")
    design_args(p)
    p.add_argument("--emit-spec", metavar="XML")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("fuzz", help="run a fuzzing campaign")
    p.add_argument("files", nargs="+")
    p.add_argument("--config", required=True)
    p.add_argument("--top")
    p.add_argument("--out", help="override out_dir from the config")
    p.set_defaults(fn=cmd_fuzz)

    p = sub.add_parser("simulate", help="run one testcase")
    design_args(p)
    cycle_args(p)
    p.add_argument("--input", required=True)
    p.add_argument("--vcd")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("replay", help="re-run a recorded crash")
    p.add_argument("files", nargs="+")
    p.add_argument("--top")
    p.add_argument("--crash", required=True)
    p.add_argument("--emit-tb", metavar="FILE")
    p.add_argument("--vcd")
    cycle_args(p)
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("report", help="plot and summarise campaigns")
    p.add_argument("dirs", nargs="+")
    p.add_argument("--svg", required=True)
    p.add_argument("--x", choices=("wall_ms", "execs"), default="wall_ms")
    p.add_argument("--merged", metavar="BIN", help="write the merged coverage snapshot")
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("gen-tb", help="generate a testbench from a spec XML")
    p.add_argument("spec")
    p.add_argument("--kind", choices=("wrapper", "replay"), required=True)
    p.add_argument("--crash")
    p.add_argument("--out")
    cycle_args(p)
    p.set_defaults(fn=cmd_gen_tb)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which would read as "crash found"
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        return args.fn(args)
    except HwFuzzError as exc:
        where = f" (line {exc.line}, col {exc.col})" if exc.line is not None else ""
        print(f"error[{exc.category}]: {exc.message}{where}", file=sys.stderr)
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
    except ValueError as exc:
        print(f"error[invalid-argument]: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
