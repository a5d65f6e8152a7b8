"""Coverage time series: samples, CSV files, an SVG progression plot, and
snapshot merging across campaigns."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

from .coverage import GlobalCoverage, coverage_pct, load_snapshot
from .errors import MergeError

CSV_HEADER = ("testcase", "wall_ms", "execs", "stmt_pct", "branch_pct", "edges", "crashes")


@dataclass(frozen=True)
class CoverageSample:
    testcase: int
    wall_ms: int
    execs: int
    stmt_pct: float
    branch_pct: float
    edges: int
    crashes: int

    def row(self) -> list:
        return [str(self.testcase), str(self.wall_ms), str(self.execs), f"{self.stmt_pct:.2f}",
                f"{self.branch_pct:.2f}", str(self.edges), str(self.crashes)]


def record_sample(stats, glob: GlobalCoverage, nl=None) -> CoverageSample:
    """Snapshot the campaign's cumulative counters and append to ``stats.samples``."""
    stmt, branch = coverage_pct(glob, nl)
    s = CoverageSample(stats.corpus_size, stats.wall_ms, stats.execs, stmt, branch,
                       glob.edge_count, stats.unique_crashes)
    stats.samples.append(s)
    return s


def csv_text(samples: Iterable[CoverageSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in samples:
        w.writerow(s.row())
    return buf.getvalue()


def emit_csv(samples: Iterable[CoverageSample], path) -> Path:
    path = Path(path)
    path.write_text(csv_text(samples), encoding="utf-8", newline="\n")
    return path


def read_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: not a coverage CSV")
    out = []
    for r in rows[1:]:
        out.append(CoverageSample(int(r[0]), int(r[1]), int(r[2]), float(r[3]), float(r[4]),
                                  int(r[5]), int(r[6])))
    return out


# -- plot --------------------------------------------------------------------

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
_W, _H = 720, 420
_L, _R, _T, _B = 60, 150, 30, 50


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def plot_svg(series: Sequence[tuple], x_axis: str = "wall_ms", title: str = "Statement coverage") -> str:
    """One polyline per ``(name, samples)`` series; y is stmt_pct on 0..100."""
    if not series:
        raise ValueError("need at least one series")
    if x_axis not in ("wall_ms", "execs"):
        raise ValueError("x_axis must be 'wall_ms' or 'execs'")
    xmax = max((getattr(s, x_axis) for _, samples in series for s in samples), default=0) or 1
    pw, ph = _W - _L - _R, _H - _T - _B

    def px(x):
        return _L + pw * x / xmax

    def py(y):
        return _T + ph * (1 - y / 100)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
           f'<text x="{_L + pw / 2:.0f}" y="18" text-anchor="middle">{escape(title)}</text>']
    for tick in range(0, 101, 20):
        y = _fmt(py(tick))
        out.append(f'<line x1="{_L}" y1="{y}" x2="{_L + pw}" y2="{y}" stroke="#dddddd"/>')
        out.append(f'<text x="{_L - 6}" y="{y}" text-anchor="end" dominant-baseline="middle">{tick}</text>')
    for k in range(6):
        xv = xmax * k / 5
        x = _fmt(px(xv))
        label = _fmt(xv / 1000) if x_axis == "wall_ms" else str(int(xv))
        out.append(f'<text x="{x}" y="{_T + ph + 16}" text-anchor="middle">{label}</text>')
    out.append(f'<line x1="{_L}" y1="{_T + ph}" x2="{_L + pw}" y2="{_T + ph}" stroke="black"/>')
    out.append(f'<line x1="{_L}" y1="{_T}" x2="{_L}" y2="{_T + ph}" stroke="black"/>')
    xlabel = "wall time (s)" if x_axis == "wall_ms" else "executions"
    out.append(f'<text x="{_L + pw / 2:.0f}" y="{_H - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{_T + ph / 2:.0f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_T + ph / 2:.0f})">stmt coverage (%)</text>')
    for i, (name, samples) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(getattr(s, x_axis)))},{_fmt(py(s.stmt_pct))}" for s in samples)
        out.append(f'<polyline class="series" data-name="{escape(name)}" fill="none" '
                   f'stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = _T + 10 + 20 * i
        out.append(f'<g class="legend"><line x1="{_L + pw + 15}" y1="{ly}" x2="{_L + pw + 35}" '
                   f'y2="{ly}" stroke="{color}" stroke-width="2"/>'
                   f'<text x="{_L + pw + 40}" y="{ly}" dominant-baseline="middle">{escape(name)}</text></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(series: Sequence[tuple], path, x_axis: str = "wall_ms") -> Path:
    path = Path(path)
    path.write_text(plot_svg(series, x_axis), encoding="utf-8", newline="\n")
    return path


# -- snapshots ---------------------------------------------------------------

def merge_campaign_covs(snapshots: Sequence) -> GlobalCoverage:
    """Fold coverage snapshot files (paths or raw bytes) from one design."""
    if not snapshots:
        raise MergeError("corrupt-snapshot", "no snapshots given")
    out = None
    for snap in snapshots:
        data = snap if isinstance(snap, (bytes, bytearray)) else Path(snap).read_bytes()
        g = load_snapshot(bytes(data))
        if out is None:
            out = g
            continue
        if g.netlist_hash != out.netlist_hash or g.kinds != out.kinds:
            raise MergeError("netlist-mismatch", "snapshots come from different netlists")
        out.absorb(g)
    return out
