"""End-to-end command-line behaviour."""
import pytest

from hwfuzz.cli import main
from hwfuzz.designs import design_path
from hwfuzz.rtl import read_spec_xml

KS = str(design_path("key_store_debug"))


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_emits_spec(capsys, tmp_path):
    code, out, _ = run(capsys, "parse", KS, "--emit-spec", tmp_path / "s.xml")
    assert code == 0
    assert "clock: clk_in  reset: rst_n_in (active low)" in out
    assert "1 byte(s) per frame" in out
    spec = read_spec_xml((tmp_path / "s.xml").read_text())
    assert spec.top == "key_store_debug" and spec.stimulus_width == 1


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.v"
    bad.write_text("module m(input clk; endmodule")
    code, _, err = run(capsys, "parse", bad)
    assert code == 1 and err.startswith("error[syntax]:") and "line 1" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "parse", tmp_path / "none.v")
    assert code == 1 and err.startswith("error[")


def test_usage_error_is_exit_1(capsys):
    assert run(capsys, "fuzz")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1


def test_fuzz_replay_pipeline(capsys, tmp_path):
    cfg = tmp_path / "c.hjson"
    cfg.write_text("{engine: fairfuzz, max_execs: 3000, rng_seed: 3}")
    out_dir = tmp_path / "out"
    code, out, _ = run(capsys, "fuzz", KS, "--config", cfg, "--out", out_dir)
    assert code == 2 and "unique crashes" in out
    for f in ("stats.csv", "coverage.bin", "campaign.meta"):
        assert (out_dir / f).exists()
    crash = sorted((out_dir / "crashes").glob("crash_??????"))[0]
    tb = tmp_path / "replay.v"
    code, out, _ = run(capsys, "replay", KS, "--crash", crash, "--emit-tb", tb, "--vcd", tmp_path / "r.vcd")
    assert code == 2
    assert "crash: assertion 0 at cycle" in out and "reproduces" in out
    assert tb.read_text().startswith("//")
    assert "$enddefinitions" in (tmp_path / "r.vcd").read_text()


def test_replay_detects_tampered_meta(capsys, tmp_path):
    cfg = tmp_path / "c.hjson"
    cfg.write_text("{max_execs: 500}")
    run(capsys, "fuzz", KS, "--config", cfg, "--out", tmp_path / "o")
    crash = sorted((tmp_path / "o" / "crashes").glob("crash_??????"))[0]
    meta = crash.with_name(crash.name + ".meta")
    meta.write_text(meta.read_text().replace("dedup_key: 0:", "dedup_key: 1:"))
    code, _, err = run(capsys, "replay", KS, "--crash", crash)
    assert code == 1 and "replay-mismatch" in err


def test_fuzz_without_crash_exits_0(capsys, tmp_path):
    cfg = tmp_path / "c.hjson"
    cfg.write_text("{max_execs: 400}")
    code, _, _ = run(capsys, "fuzz", design_path("counter8"), "--config", cfg, "--out", tmp_path / "o")
    assert code == 0


def test_bad_config_exit_1(capsys, tmp_path):
    cfg = tmp_path / "c.hjson"
    cfg.write_text("{engine: nope, max_execs: 1}")
    code, _, err = run(capsys, "fuzz", KS, "--config", cfg)
    assert code == 1 and err.startswith("error[invariant-violation]")


def test_simulate(capsys, tmp_path):
    inp = tmp_path / "in.bin"
    inp.write_bytes(b"")
    code, out, _ = run(capsys, "simulate", KS, "--input", inp)
    assert code == 0 and "completed: 2 cycles" in out and "key_out=0xBADE0000ACEC" in out
    inp.write_bytes(b"\x01")
    code, out, _ = run(capsys, "simulate", KS, "--input", inp, "--reset-cycles", "3")
    assert code == 2 and "at cycle 3" in out


def test_report(capsys, tmp_path):
    cfg = tmp_path / "c.hjson"
    dirs = []
    for eng in ("afl", "tortoise"):
        cfg.write_text(f"{{engine: {eng}, max_execs: 600}}")
        run(capsys, "fuzz", design_path("fsm_lock"), "--config", cfg, "--out", tmp_path / eng)
        dirs.append(tmp_path / eng)
    code, out, _ = run(capsys, "report", *dirs, "--svg", tmp_path / "p.svg", "--x", "execs",
                       "--merged", tmp_path / "m.bin")
    assert code == 0 and "2 series" in out and "merged: stmt" in out
    svg = (tmp_path / "p.svg").read_text()
    assert 'data-name="afl"' in svg and 'data-name="tortoise"' in svg


def test_report_mismatched_designs(capsys, tmp_path):
    cfg = tmp_path / "c.hjson"
    cfg.write_text("{max_execs: 200}")
    run(capsys, "fuzz", design_path("fsm_lock"), "--config", cfg, "--out", tmp_path / "a")
    run(capsys, "fuzz", design_path("alu8"), "--config", cfg, "--out", tmp_path / "b")
    code, _, err = run(capsys, "report", tmp_path / "a", tmp_path / "b", "--svg", tmp_path / "p.svg",
                       "--merged", tmp_path / "m.bin")
    assert code == 1 and "netlist-mismatch" in err


def test_gen_tb(capsys, tmp_path):
    run(capsys, "parse", KS, "--emit-spec", tmp_path / "s.xml")
    code, out, _ = run(capsys, "gen-tb", tmp_path / "s.xml", "--kind", "wrapper")
    assert code == 0 and out.startswith("module key_store_debug_tb (")
    crash = tmp_path / "c.bin"
    crash.write_bytes(b"\x00\x01")
    code, _, _ = run(capsys, "gen-tb", tmp_path / "s.xml", "--kind", "replay", "--crash", crash,
                     "--out", tmp_path / "r.v")
    assert code == 0 and "module key_store_debug_replay;" in (tmp_path / "r.v").read_text()
    code, _, err = run(capsys, "gen-tb", tmp_path / "s.xml", "--kind", "replay")
    assert code == 1 and "error[usage]" in err


def test_module_entry_point():
    import subprocess, sys
    r = subprocess.run([sys.executable, "-m", "hwfuzz", "parse", KS], capture_output=True, text=True)
    assert r.returncode == 0 and "top: key_store_debug" in r.stdout
