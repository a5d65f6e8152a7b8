"""Value change dump output for traced runs."""
from __future__ import annotations

import io


def _ident(n: int) -> str:
    # printable ASCII 33..126, little-endian base 94
    chars = []
    while True:
        chars.append(chr(33 + n % 94))
        n //= 94
        if not n:
            return "".join(chars)


def _value(v: int, width: int, code: str) -> str:
    if width == 1:
        return f"{v}{code}"
    return f"b{v:b} {code}"


def emit_vcd(nl, trace, timescale: str = "1ns", period: int = 10) -> str:
    """Render ``trace`` (one value tuple per simulated cycle) as VCD text.

    Signals are grouped into nested scopes along their ``inst.`` prefixes;
    identifier codes follow signal id order. Cycle k is dumped at time
    ``k * period``: all values in the first section, changes afterwards.
    """
    out = io.StringIO()
    w = out.write
    w("$version hwfuzz $end\n")
    w(f"$timescale {timescale} $end\n")
    codes = [_ident(s.sid) for s in nl.signals]

    tree: dict = {}
    for s in nl.signals:
        parts = s.name.split(".")
        node = tree
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node.setdefault(None, []).append(s)

    def scope(name, node):
        w(f"$scope module {name} $end\n")
        for s in node.get(None, []):
            w(f"$var wire {s.width} {codes[s.sid]} {s.name.split('.')[-1]} $end\n")
        for key in node:
            if key is not None:
                scope(key, node[key])
        w("$upscope $end\n")

    scope(nl.top, tree)
    w("$enddefinitions $end\n")
    prev = None
    widths = [s.width for s in nl.signals]
    for k, row in enumerate(trace):
        w(f"#{k * period}\n")
        if prev is None:
            w("$dumpvars\n")
            for sid, v in enumerate(row):
                w(_value(v, widths[sid], codes[sid]) + "\n")
            w("$end\n")
        else:
            for sid, v in enumerate(row):
                if v != prev[sid]:
                    w(_value(v, widths[sid], codes[sid]) + "\n")
        prev = row
    return out.getvalue()
