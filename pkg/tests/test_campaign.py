"""Campaign loop: crash discovery, triage, determinism, output layout."""
import csv
import random

import pytest
from hypothesis import given, settings, strategies as st

from hwfuzz.config import FuzzConfig
from hwfuzz.errors import ConfigError
from hwfuzz.fuzz import CrashSet, load_dict, load_seeds, run_campaign, triage_crash
from hwfuzz.fuzz.campaign import parse_crash_meta
from hwfuzz.fuzz.engines import ENGINES
from hwfuzz.sim import RunConfig, run_testcase

from conftest import build

DIVASSERT = """
module da(input clk, input rst, input [3:0] x, input a, output reg [3:0] q);
  always @(posedge clk) begin
    if (rst) q <= 0;
    else if (a) q <= 4'd1;
    else q <= 4'd15 / x;
  end
  no_a: assert property (@(posedge clk) disable iff (rst) a |-> 1'b0);
endmodule"""


@pytest.mark.parametrize("engine", ENGINES)
def test_listing1_crash_found_quickly(ks, engine):
    res = run_campaign(ks, None, FuzzConfig(engine=engine, max_execs=5000))
    assert res.stats.unique_crashes >= 1
    rec = res.crashes.records[0]
    assert (rec.kind, rec.ident) == ("assertion", 0)
    assert res.stats.execs <= 5000
    replay = run_testcase(ks, rec.data)
    assert replay.crashed and (replay.crash_info.ident, replay.last_point) == rec.key


def test_bruteforce_single_frame_crashes(ks):
    crashing = [b for b in range(256) if run_testcase(ks, bytes([b])).crashed]
    assert len(crashing) == 128
    assert all(b & 1 for b in crashing)


def test_max_execs_zero_keeps_seeds_only(ks, tmp_path):
    res = run_campaign(ks, [b"\x00", b"\x01"], FuzzConfig(max_execs=0), tmp_path / "o")
    assert res.stats.execs == 0 and len(res.corpus) == 2
    assert sorted(p.name for p in (tmp_path / "o" / "corpus").iterdir()) == [
        "id_000000_seed", "id_000001_seed"]
    assert list((tmp_path / "o" / "crashes").iterdir()) == []


def test_triage_two_unique_kinds():
    nl = build(DIVASSERT)
    cs = CrashSet()
    cfg = RunConfig(reset_cycles=1)
    div = run_testcase(nl, [{"x": 0, "a": 0}], cfg)
    div2 = run_testcase(nl, [{"x": 0, "a": 0}, {"x": 0, "a": 0}], cfg)
    ast = run_testcase(nl, [{"x": 3, "a": 1}], cfg)
    assert div.crash_info.kind == "div-by-zero" and ast.crash_info.kind == "assertion"
    assert [triage_crash(r, cs, b"") for r in (div, div2, ast, ast)] == [
        "new-unique", "duplicate", "new-unique", "duplicate"]
    assert len(cs) == 2 and cs.total == 4


def test_campaign_finds_both_crash_kinds(tmp_path):
    nl = build(DIVASSERT)
    res = run_campaign(nl, None, FuzzConfig(max_execs=3000, reset_cycles=1), tmp_path / "o")
    kinds = {r.kind for r in res.crashes}
    assert kinds == {"assertion", "div-by-zero"}
    metas = sorted((tmp_path / "o" / "crashes").glob("*.meta"))
    assert len(metas) == len(res.crashes)
    for m, rec in zip(metas, res.crashes):
        meta = parse_crash_meta(m.read_text())
        assert meta["dedup_key"] == rec.key_str and meta["kind"] == rec.kind


def _tree(d):
    out = {}
    for p in sorted(d.rglob("*")):
        if p.is_file():
            out[str(p.relative_to(d))] = p.read_bytes()
    rows = list(csv.reader(out.pop("stats.csv").decode().splitlines()))
    wall = rows[0].index("wall_ms")
    out["stats"] = [r[:wall] + r[wall + 1:] for r in rows]
    return out


@pytest.mark.parametrize("engine", ENGINES)
def test_single_worker_deterministic(designs, engine, tmp_path):
    nl = designs["fsm_lock"]
    cfg = FuzzConfig(engine=engine, max_execs=2500, rng_seed=7)
    run_campaign(nl, None, cfg, tmp_path / "a")
    run_campaign(nl, None, cfg, tmp_path / "b")
    assert _tree(tmp_path / "a") == _tree(tmp_path / "b")


def test_different_seeds_diverge(designs):
    nl = designs["alu8"]
    a = run_campaign(nl, None, FuzzConfig(max_execs=2000, rng_seed=1))
    b = run_campaign(nl, None, FuzzConfig(max_execs=2000, rng_seed=2))
    assert [e.data for e in a.corpus] != [e.data for e in b.corpus]


def test_corpus_invariants(designs):
    nl = designs["counter8"]
    res = run_campaign(nl, None, FuzzConfig(engine="aflpp", max_execs=3000))
    ids = [e.id for e in res.corpus]
    assert ids == list(range(len(ids)))
    union = 0
    for e in res.corpus:
        assert not run_testcase(nl, e.data, RunConfig()).crashed
        union |= e.coverage.hits
    assert union == res.coverage.hits
    # samples are cumulative
    execs = [s.execs for s in res.stats.samples]
    stmts = [s.stmt_pct for s in res.stats.samples]
    assert execs == sorted(execs) and stmts == sorted(stmts)
    assert res.stats.execs == 3000


def test_multi_worker_runs(designs):
    res = run_campaign(designs["fsm_lock"], None, FuzzConfig(max_execs=2000, workers=3))
    assert res.stats.execs == 2000 and len(res.corpus) > 1


def test_duration_bound(ks):
    res = run_campaign(ks, None, FuzzConfig(duration_secs=0.3))
    assert res.stats.wall_ms < 3000 and res.stats.execs > 0


def test_refuses_foreign_nonempty_dir(ks, tmp_path):
    (tmp_path / "keep.txt").write_text("x")
    with pytest.raises(ConfigError):
        run_campaign(ks, None, FuzzConfig(max_execs=10), tmp_path)


def test_rerun_into_campaign_dir(ks, tmp_path):
    run_campaign(ks, None, FuzzConfig(max_execs=300), tmp_path)
    res = run_campaign(ks, None, FuzzConfig(max_execs=100), tmp_path)
    assert len(list((tmp_path / "corpus").iterdir())) == len(res.corpus)


def test_load_seeds_and_dict(tmp_path):
    (tmp_path / "s").mkdir()
    (tmp_path / "s" / "b").write_bytes(b"\x02")
    (tmp_path / "s" / "a").write_bytes(b"\x01")
    assert load_seeds(tmp_path / "s") == [b"\x01", b"\x02"]
    d = tmp_path / "t.dict"
    d.write_text('# tokens\nkw1="\\xA5\\x3C"\n"ab"\n\n')
    assert load_dict(d) == [b"\xa5\x3c", b"ab"]


def test_dictionary_tokens_reach_lock(designs):
    nl = designs["fsm_lock"]
    res = run_campaign(nl, None, FuzzConfig(max_execs=3000), tokens=[b"\xa5\x3c\x7e"])
    assert res.stats.stmt_pct == 100.0


@settings(max_examples=15)
@given(st.integers(0, 2**32), st.integers(1, 400), st.sampled_from(ENGINES))
def test_exec_budget_exact(seed, budget, engine):
    from hwfuzz.designs import load_design
    nl = load_design("key_store_debug")
    res = run_campaign(nl, None, FuzzConfig(engine=engine, max_execs=budget, rng_seed=seed))
    assert res.stats.execs == budget
    assert res.stats.total_crashes >= res.stats.unique_crashes
