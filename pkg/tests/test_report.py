"""CSV samples, SVG plots and snapshot merging."""
import re
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, strategies as st

from hwfuzz.config import FuzzConfig
from hwfuzz.coverage import GlobalCoverage, dump_snapshot
from hwfuzz.errors import MergeError
from hwfuzz.fuzz import run_campaign
from hwfuzz.report import (
    CSV_HEADER, CoverageSample, csv_text, emit_csv, emit_plot, merge_campaign_covs, plot_svg,
    read_csv,
)

SVG = "{http://www.w3.org/2000/svg}"


def test_header_only_csv(tmp_path):
    p = emit_csv([], tmp_path / "s.csv")
    assert p.read_text() == "testcase,wall_ms,execs,stmt_pct,branch_pct,edges,crashes\n"
    assert read_csv(p) == []


def test_row_format():
    assert csv_text([CoverageSample(1, 5, 1, 50.0, 25.0, 3, 0)]).splitlines()[1] == "1,5,1,50.00,25.00,3,0"


samples = st.builds(CoverageSample, st.integers(0, 10**6), st.integers(0, 10**9), st.integers(0, 10**9),
                    st.integers(0, 10000).map(lambda x: x / 100), st.integers(0, 10000).map(lambda x: x / 100),
                    st.integers(0, 65536), st.integers(0, 1000))


@given(st.lists(samples, max_size=20))
def test_csv_roundtrip(xs):
    import tempfile, pathlib
    with tempfile.TemporaryDirectory() as d:
        p = emit_csv(xs, pathlib.Path(d) / "s.csv")
        assert read_csv(p) == xs


def test_read_csv_rejects_other_files(tmp_path):
    (tmp_path / "x.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(tmp_path / "x.csv")


def series3():
    mk = lambda ms, pct: CoverageSample(0, ms, ms, pct, 0.0, 0, 0)
    return [("afl", [mk(0, 10.0), mk(500, 40.0), mk(1000, 60.0)]),
            ("fairfuzz", [mk(0, 10.0), mk(200, 90.0)]),
            ("tortoise", [])]


def test_svg_structure():
    svg = plot_svg(series3())
    root = ET.fromstring(svg)
    lines = root.findall(f".//{SVG}polyline")
    assert [l.get("data-name") for l in lines] == ["afl", "fairfuzz", "tortoise"]
    assert len({l.get("stroke") for l in lines}) == 3
    legends = [g for g in root.iter(f"{SVG}g") if g.get("class") == "legend"]
    assert [g.find(f"{SVG}text").text for g in legends] == ["afl", "fairfuzz", "tortoise"]
    pts = [tuple(map(float, p.split(","))) for p in lines[0].get("points").split()]
    assert pts[0][0] == 60 and pts[-1][0] == 570  # x spans the plot area
    assert pts[0][1] > pts[1][1] > pts[2][1]  # higher coverage is drawn higher


def test_svg_deterministic_and_x_axis(tmp_path):
    assert plot_svg(series3()) == plot_svg(series3())
    assert "executions" in plot_svg(series3(), "execs")
    with pytest.raises(ValueError):
        plot_svg(series3(), "cycles")
    with pytest.raises(ValueError):
        plot_svg([])
    assert emit_plot(series3(), tmp_path / "p.svg").read_text().startswith("<svg")


def test_svg_escapes_names():
    svg = plot_svg([("a<b&c", [CoverageSample(0, 1, 1, 5.0, 0.0, 0, 0)])])
    ET.fromstring(svg)
    assert "a&lt;b&amp;c" in svg


def test_merge_campaign_snapshots(designs, tmp_path):
    nl = designs["fsm_lock"]
    a = run_campaign(nl, None, FuzzConfig(max_execs=800, rng_seed=1), tmp_path / "a")
    b = run_campaign(nl, None, FuzzConfig(max_execs=800, rng_seed=2), tmp_path / "b")
    m = merge_campaign_covs([tmp_path / "a" / "coverage.bin", tmp_path / "b" / "coverage.bin"])
    assert m.hits == a.coverage.hits | b.coverage.hits
    assert m.corpus_hits == [x + y for x, y in zip(a.coverage.corpus_hits, b.coverage.corpus_hits)]


def test_merge_netlist_mismatch(designs):
    a = dump_snapshot(GlobalCoverage.for_netlist(designs["fsm_lock"]))
    b = dump_snapshot(GlobalCoverage.for_netlist(designs["alu8"]))
    with pytest.raises(MergeError) as ei:
        merge_campaign_covs([a, b])
    assert ei.value.category == "netlist-mismatch"
    with pytest.raises(MergeError):
        merge_campaign_covs([])
