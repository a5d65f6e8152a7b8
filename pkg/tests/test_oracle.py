"""Differential check against a naive AST interpreter on random designs."""
import random

import pytest

from hwfuzz.rtl import extract_spec, parse
from hwfuzz.sim import RunConfig, elaborate, run_testcase

from netgen import DesignGen
from reference import reference_run


def check_seed(seed):
    g = DesignGen(random.Random(seed))
    src, ins = g.design()
    frames = g.frames(ins)
    mods = parse(src)
    spec = extract_spec(mods, "rnd")
    nl = elaborate(mods, spec)
    res = run_testcase(nl, frames, RunConfig(reset_cycles=2, max_cycles=100, trace=True))
    ref = reference_run(mods[0], spec, frames)
    names = [s.name for s in nl.signals]
    got = [dict(zip(names, row)) for row in res.trace]
    exp = [x for x in ref if isinstance(x, dict)]
    assert got == exp, src
    trapped = bool(ref) and isinstance(ref[-1], tuple)
    assert res.crashed == trapped, src
    if trapped:
        assert (res.crash_info.kind, res.crash_info.cycle) == ref[-1][1:], src
    return res.crashed


@pytest.mark.parametrize("block", range(4))
def test_random_designs_match_reference(block):
    traps = sum(check_seed(seed) for seed in range(block * 50, block * 50 + 50))
    assert traps < 50
