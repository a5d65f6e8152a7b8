"""Template-driven testbench generation: the generic wrapper and crash replays.

Templates live in ``templates/`` and use a small placeholder grammar:

``{{name}}``
    value lookup; dotted paths walk into nested mappings.
``{{#each list}} ... {{/each}}``
    repeat the body per item; inside, names resolve against the item first,
    and ``@index``, ``@first``, ``@last`` describe the position.
``{{#if name}} ... {{/if}}`` / ``{{#unless name}} ... {{/unless}}``
    conditional on truthiness.

A block tag alone on its line removes that line entirely, so templates can
be laid out one construct per line. To target a commercial simulator, copy
``replay.tpl`` and swap the clock generator and stop statement as needed.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import GenError
from .stimulus import decode, encode, frame_size

TEMPLATE_DIR = Path(__file__).resolve().parent / "templates"
_TAG = re.compile(r"\{\{\s*([#/]?)\s*([@\w.]+)?\s*([@\w.]*)\s*\}\}")


# -- template engine -----------------------------------------------------------

def _tokens(text: str):
    """Split into ("text", s) and ("tag", kind, name) tokens, dropping standalone block lines."""
    out = []
    pos = 0
    for m in _TAG.finditer(text):
        start, end = m.start(), m.end()
        sigil, word, arg = m.group(1), m.group(2) or "", m.group(3)
        block = sigil in "#/" and sigil != ""
        if block:
            line_start = text.rfind("\n", 0, start) + 1
            line_end = text.find("\n", end)
            line_end = len(text) if line_end < 0 else line_end
            if not text[line_start:start].strip() and not text[end:line_end].strip():
                start = line_start
                end = min(len(text), line_end + 1)
        if start > pos:
            out.append(("text", text[pos:start]))
        if sigil == "#":
            out.append(("open", word, arg))
        elif sigil == "/":
            out.append(("close", word))
        else:
            out.append(("var", word))
        pos = max(pos, end)
    if pos < len(text):
        out.append(("text", text[pos:]))
    return out


def _parse(tokens, i=0, closer=None):
    nodes = []
    while i < len(tokens):
        tok = tokens[i]
        if tok[0] == "close":
            if tok[1] != closer:
                raise GenError("template", f"unexpected {{{{/{tok[1]}}}}}")
            return nodes, i + 1
        if tok[0] == "open":
            if tok[1] not in ("each", "if", "unless"):
                raise GenError("template", f"unknown block '{tok[1]}'")
            body, i = _parse(tokens, i + 1, tok[1])
            nodes.append(("block", tok[1], tok[2], body))
            continue
        nodes.append(tok)
        i += 1
    if closer is not None:
        raise GenError("template", f"unclosed {{{{#{closer}}}}}")
    return nodes, i


def _lookup(stack, name):
    if name == ".":
        return stack[-1]
    head, *rest = name.split(".")
    for scope in reversed(stack):
        if isinstance(scope, dict) and head in scope:
            val = scope[head]
            break
    else:
        raise GenError("template", f"no value for '{name}'")
    for part in rest:
        val = val[part]
    return val


def _render(nodes, stack, out):
    for n in nodes:
        if n[0] == "text":
            out.append(n[1])
        elif n[0] == "var":
            out.append(str(_lookup(stack, n[1])))
        else:
            _, kind, arg, body = n
            val = _lookup(stack, arg)
            if kind == "each":
                items = list(val)
                for k, item in enumerate(items):
                    meta = {"@index": k, "@first": k == 0, "@last": k == len(items) - 1}
                    _render(body, stack + [meta, item], out)
            elif bool(val) == (kind == "if"):
                _render(body, stack, out)


def render(template: str, context: dict) -> str:
    nodes, _ = _parse(_tokens(template))
    out = []
    _render(nodes, [context], out)
    return "".join(out)


def load_template(name: str) -> str:
    return (TEMPLATE_DIR / name).read_text(encoding="utf-8")


# -- models ----------------------------------------------------------------

@dataclass(frozen=True)
class TbModel:
    spec: object
    kind: str  # "wrapper" | "replay"
    stimulus: Optional[tuple] = None
    crash: Optional[tuple] = None  # (assertion id or trap kind, cycle)

    def __post_init__(self):
        if self.kind not in ("wrapper", "replay"):
            raise GenError("bad-kind", f"unknown testbench kind '{self.kind}'")
        if self.kind == "replay" and self.stimulus is None:
            raise GenError("undecodable", "replay testbench needs a stimulus")


def _range(p) -> str:
    return f"[{p.msb}:{p.lsb}] " if p.width > 1 or p.msb != p.lsb else ""


def _lit(value: int, width: int) -> str:
    return f"{width}'h{value:X}"


def _port_ctx(p):
    return {"name": p.name, "direction": p.direction, "kind": p.kind, "range": _range(p),
            "width": p.width, "zero": _lit(0, p.width)}


def instance_name(spec, base: str) -> str:
    """``base``, or ``base_<n>`` when a port of ``spec`` already uses the name."""
    taken = {p.name for p in spec.ports}
    name, n = base, 0
    while name in taken:
        name, n = f"{base}_{n}", n + 1
    return name


def render_model(model: TbModel, reset_cycles: int = 2, half_period: int = 5) -> str:
    spec = model.spec
    ports = [_port_ctx(p) for p in spec.ports]
    if model.kind == "wrapper":
        return render(load_template("wrapper.tpl"),
                      {"top": spec.top, "ports": ports, "inst": instance_name(spec, "cl")})
    widths = {p.name: p.width for p in spec.data_inputs}
    frames = []
    for k, f in enumerate(model.stimulus):
        values = [{"name": name, "value": _lit(f[name], w)} for name, w in widths.items()]
        frames.append({"cycle": reset_cycles + k, "values": values})
    active = spec.reset_active_value
    if model.crash is None:
        failure, cycle = "none recorded", "-"
    else:
        ident, cycle = model.crash
        failure = f"assertion {ident}" if isinstance(ident, int) else f"trap {ident}"
    ctx = {
        "top": spec.top, "inst": instance_name(spec, "dut"), "clock": spec.clock, "reset": spec.reset,
        "reset_active": _lit(active, 1), "reset_inactive": _lit(1 - active, 1),
        "inputs": [_port_ctx(p) for p in spec.data_inputs],
        "outputs": [_port_ctx(p) for p in spec.outputs],
        "ports": ports, "half_period": half_period,
        "reset_waits": list(range(reset_cycles)),
        "frames": frames, "n_frames": len(frames),
        "reset_cycles": reset_cycles, "failure": failure, "cycle": cycle,
    }
    return render(load_template("replay.tpl"), ctx)


def gen_wrapper_tb(spec) -> str:
    """Wrapper module ``<top>_tb`` with the DUV's ports, instantiating it as ``cl``.

    The instance is renamed (``cl_0``, ...) if a port is itself called ``cl``.
    """
    return render_model(TbModel(spec, "wrapper"))


def gen_replay_tb(spec, crash, cfg=None, frame_bytes: Optional[int] = None) -> str:
    """Self-driving testbench that re-applies a crash's input sequence.

    ``crash`` is a CrashRecord or raw bytes. ``frame_bytes`` is the frame size
    the bytes were produced under; a mismatch with the spec is undecodable.
    """
    reset_cycles = cfg.reset_cycles if cfg is not None else 2
    data = crash if isinstance(crash, (bytes, bytearray)) else crash.data
    fsz = frame_size(spec)
    if frame_bytes is not None and frame_bytes != fsz:
        raise GenError("undecodable", f"input uses {frame_bytes}-byte frames but the spec needs {fsz}")
    frames = decode(bytes(data), spec)
    if cfg is not None:
        frames = frames[:max(0, cfg.max_cycles - reset_cycles)]
    note = None if isinstance(crash, (bytes, bytearray)) else (crash.ident, crash.cycle)
    return render_model(TbModel(spec, "replay", tuple(frames), note), reset_cycles)


def replay_frames_bytes(spec, frames) -> bytes:
    return encode(frames, spec)


def map_points(tb_nl, inst: str = "dut") -> dict:
    """Testbench point id -> DUV point id, by instance path and local index."""
    prefix = inst + "."
    out = {}
    for p in tb_nl.cov_points:
        if p.path.startswith(prefix):
            out[p.id] = (p.path[len(prefix):], p.local)
    return out


def replay_key(tb_nl, duv_nl, result, inst: Optional[str] = None):
    """Dedup key of a testbench run, expressed in DUV point ids.

    ``inst`` defaults to the instance name the replay template gives the DUV.
    """
    if not result.crashed:
        return None
    if inst is None:
        inst = instance_name(duv_nl.spec, "dut")
    by_path = {(p.path, p.local): p.id for p in duv_nl.cov_points}
    tb_map = map_points(tb_nl, inst)
    last = -1
    for pid in reversed(result.fired):
        if pid in tb_map:
            last = by_path[tb_map[pid]]
            break
    return (result.crash_info.ident, last)
