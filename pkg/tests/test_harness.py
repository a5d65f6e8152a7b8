"""Template engine, wrapper and replay testbenches."""
import random

import pytest
from hypothesis import given, strategies as st

from hwfuzz.config import FuzzConfig
from hwfuzz.designs import design_source
from hwfuzz.errors import GenError
from hwfuzz.fuzz import run_campaign
from hwfuzz.fuzz.campaign import CrashRecord
from hwfuzz.harness import TbModel, gen_replay_tb, gen_wrapper_tb, load_template, render, replay_key
from hwfuzz.rtl import DesignSpec, PortDecl, extract_spec, parse
from hwfuzz.sim import RunConfig, elaborate, elaborate_testbench, run_testbench, run_testcase

from netgen import DesignGen


def test_render_variables_and_blocks():
    t = "{{#each xs}}{{name}}{{#unless @last}}, {{/unless}}{{/each}}"
    assert render(t, {"xs": [{"name": "a"}, {"name": "b"}, {"name": "c"}]}) == "a, b, c"
    assert render("{{#if f}}yes{{/if}}{{#unless f}}no{{/unless}}", {"f": []}) == "no"
    assert render("{{a.b}}-{{#each xs}}{{@index}}{{/each}}", {"a": {"b": 7}, "xs": "xyz"}) == "7-012"


def test_standalone_block_lines_vanish():
    t = "top\n  {{#each xs}}\n  - {{.}}\n  {{/each}}\nend\n"
    assert render(t, {"xs": [1, 2]}) == "top\n  - 1\n  - 2\nend\n"


def test_inner_scope_falls_back_to_outer():
    assert render("{{#each xs}}{{top}}{{.}}{{/each}}", {"top": "t", "xs": [1, 2]}) == "t1t2"


@pytest.mark.parametrize("bad", ["{{#each xs}}", "{{/if}}", "{{#loop xs}}{{/loop}}", "{{missing}}"])
def test_template_errors(bad):
    with pytest.raises(GenError):
        render(bad, {"xs": []})


def test_wrapper_for_listing1(ks):
    text = gen_wrapper_tb(ks.spec)
    assert text.startswith("module key_store_debug_tb (\n  input wire clk_in,\n")
    assert "  output reg [63:0] key_out\n);" in text
    assert "  key_store_debug cl(.clk_in(clk_in),\n    .rst_n_in(rst_n_in)," in text
    assert text.rstrip().endswith("endmodule")


def test_wrapper_portless_module():
    # a DesignSpec always has clock and reset ports, so drive the template directly
    text = render(load_template("wrapper.tpl"), {"top": "idle", "ports": [], "inst": "cl"})
    assert "  idle cl();" in text
    assert parse(text + "module idle; endmodule")[0].name == "idle_tb"


names = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in {"input", "output", "wire", "reg", "module", "begin", "end", "if", "else",
                        "case", "assign", "always", "initial", "assert", "property"})


@st.composite
def specs(draw):
    extra = draw(st.lists(st.tuples(names, st.sampled_from(["input", "output"]), st.integers(1, 70)),
                          max_size=6, unique_by=lambda t: t[0]))
    extra = [t for t in extra if t[0] not in ("clk", "rst")]
    ports = [PortDecl("clk", "input", "wire", 0, 0), PortDecl("rst", "input", "wire", 0, 0)]
    ports += [PortDecl(n, d, "wire" if d == "input" else "reg", w - 1, 0) for n, d, w in extra]
    draw(st.randoms()).shuffle(ports)
    return DesignSpec("dut_" + draw(names), tuple(ports), "clk", "rst", False)


@given(specs())
def test_wrapper_parses_back(spec):
    mods = parse(gen_wrapper_tb(spec))
    (m,) = mods
    assert m.name == spec.top + "_tb"
    assert [(p.name, p.direction, p.width) for p in m.ports] == [
        (p.name, p.direction, p.width) for p in spec.ports]
    (inst,) = m.instances
    assert inst.module == spec.top and [c[0] for c in inst.connections] == [p.name for p in spec.ports]


def test_wrapper_renames_colliding_instance():
    spec = DesignSpec("m", (PortDecl("clk", "input", "wire", 0, 0), PortDecl("rst", "input", "wire", 0, 0),
                            PortDecl("cl", "input", "wire", 0, 0)), "clk", "rst", False)
    (m,) = parse(gen_wrapper_tb(spec))
    assert [i.name for i in m.instances] == ["cl_0"]


PORT_NAMED_DUT = """
module pd(input clk, input rst, input dut, output reg q);
  always @(posedge clk) begin
    if (rst) q <= 1'b0;
    else q <= dut;
  end
  hit: assert property (@(posedge clk) disable iff (rst) q |-> 1'b0);
endmodule
"""


def test_replay_with_port_named_dut():
    (mod,) = parse(PORT_NAMED_DUT)
    nl = elaborate([mod], extract_spec([mod], "pd"))
    cfg = RunConfig()
    text, tb, res = replay_via_tb(PORT_NAMED_DUT, nl, b"\x01\x00", cfg)
    assert "pd dut_0(" in text
    direct = run_testcase(nl, b"\x01\x00", cfg)
    assert direct.crashed and res.crash_info.cycle == direct.crash_info.cycle
    assert replay_key(tb, nl, res) == (0, direct.last_point)


def replay_via_tb(src, nl, data, cfg):
    text = gen_replay_tb(nl.spec, data, cfg)
    tb = elaborate_testbench(parse(src) + parse(text), nl.spec.top + "_replay")
    res = run_testbench(tb, max_cycles=cfg.max_cycles + 2)
    return text, tb, res


def test_replay_listing1(ks, ks_src):
    cfg = RunConfig()
    text, tb, res = replay_via_tb(ks_src, ks, b"\x00\x00\x01", cfg)
    assert "always #5 clk_in = ~clk_in;" in text and "$finish;" in text
    direct = run_testcase(ks, b"\x00\x00\x01", cfg)
    assert res.crash_info.cycle == direct.crash_info.cycle == 4
    assert replay_key(tb, ks, res) == (0, direct.last_point)


def test_replay_without_frames(ks, ks_src):
    _, _, res = replay_via_tb(ks_src, ks, b"", RunConfig())
    assert not res.crashed and res.cycles_run == 2


def test_replay_banner_from_record(ks):
    rec = CrashRecord(b"\x01", "assertion", 0, 2, 7)
    text = gen_replay_tb(ks.spec, rec)
    assert "assertion 0" in text and "debug_mode = 1'h1;" in text


def test_replay_frame_size_mismatch(ks):
    with pytest.raises(GenError) as ei:
        gen_replay_tb(ks.spec, b"\x01", frame_bytes=2)
    assert ei.value.category == "undecodable"


def test_model_requires_stimulus(ks):
    with pytest.raises(GenError):
        TbModel(ks.spec, "replay")
    with pytest.raises(GenError):
        TbModel(ks.spec, "weird", ())


@pytest.mark.parametrize("design", ["fsm_lock", "alu8", "counter8"])
def test_replay_matches_direct_runs(designs, design):
    nl = designs[design]
    src = design_source(design)
    cfg = RunConfig(max_cycles=40)
    rng = random.Random(design)
    for _ in range(6):
        data = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 30)))
        direct = run_testcase(nl, data, cfg)
        _, tb, res = replay_via_tb(src, nl, data, cfg)
        assert res.outcome == direct.outcome
        if direct.crashed:
            assert replay_key(tb, nl, res) == (direct.crash_info.ident, direct.last_point)
            assert res.crash_info.cycle == direct.crash_info.cycle
        else:
            assert res.outputs == {} and res.cycles_run >= direct.cycles_run


def test_replay_random_trapping_designs():
    checked = 0
    for seed in range(300):
        g = DesignGen(random.Random(seed))
        src, ins = g.design()
        mods = parse(src)
        nl = elaborate(mods, extract_spec(mods, "rnd"))
        res = run_campaign(nl, None, FuzzConfig(max_execs=60, rng_seed=seed))
        for rec in res.crashes:
            _, tb, tres = replay_via_tb(src, nl, rec.data, RunConfig())
            assert replay_key(tb, nl, tres) == rec.key
            checked += 1
        if checked >= 20:
            break
    assert checked >= 20
