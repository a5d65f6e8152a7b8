"""Design-interface extraction and the spec XML format.

XML layout (2-space indent, LF endings, attributes in this order)::

    <design top="NAME" clock="NAME" reset="NAME" reset_polarity="low|high">
      <port name="..." dir="in|out" width="N"/>
    </design>
"""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Optional, Tuple
from xml.sax.saxutils import quoteattr

from ..errors import SpecError
from .ast import PortDecl, SourceModule

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_$]*$")


@dataclass(frozen=True)
class DesignSpec:
    top: str
    ports: Tuple[PortDecl, ...]
    clock: str
    reset: str
    reset_active_low: bool

    def __post_init__(self):
        names = [p.name for p in self.ports]
        if len(set(names)) != len(names):
            raise SpecError("schema-violation", "duplicate port names")
        for role, name in (("clock", self.clock), ("reset", self.reset)):
            p = self.port(name)
            if p is None or p.direction != "input" or p.width != 1:
                raise SpecError("schema-violation", f"{role} '{name}' must be a 1-bit input port")
        if self.clock == self.reset:
            raise SpecError("clock-reset-collision", f"'{self.clock}' is both clock and reset")

    def port(self, name: str) -> Optional[PortDecl]:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    @property
    def data_inputs(self) -> Tuple[PortDecl, ...]:
        """Input ports driven by stimulus, in declaration order."""
        return tuple(p for p in self.ports
                     if p.direction == "input" and p.name not in (self.clock, self.reset))

    @property
    def outputs(self) -> Tuple[PortDecl, ...]:
        return tuple(p for p in self.ports if p.direction == "output")

    @property
    def stimulus_width(self) -> int:
        return sum(p.width for p in self.data_inputs)

    @property
    def reset_polarity(self) -> str:
        return "low" if self.reset_active_low else "high"

    @property
    def reset_active_value(self) -> int:
        return 0 if self.reset_active_low else 1


def _is_active_low(name: str) -> bool:
    low = name.lower()
    return "_n" in low or "n_" in low or low.endswith("n")


def extract_spec(modules, top_name, clock_hint=None, reset_hint=None) -> DesignSpec:
    mod = next((m for m in modules if m.name == top_name), None)
    if mod is None:
        raise SpecError("no-such-module", f"no module named '{top_name}'")
    one_bit_inputs = [p for p in mod.ports if p.direction == "input" and p.width == 1]

    def pick(hint, keys, category, role):
        if hint is not None:
            p = mod.port(hint)
            if p is None or p.direction != "input" or p.width != 1:
                raise SpecError(category, f"{role} hint '{hint}' is not a 1-bit input of '{top_name}'")
            return p
        for p in one_bit_inputs:
            if any(k in p.name.lower() for k in keys):
                return p
        raise SpecError(category, f"no {role} input found on '{top_name}'")

    clock = pick(clock_hint, ("clk", "clock"), "no-clock-found", "clock")
    reset = pick(reset_hint, ("rst", "reset"), "no-reset-found", "reset")
    if clock.name == reset.name:
        raise SpecError("clock-reset-collision", f"'{clock.name}' matched as both clock and reset")
    return DesignSpec(top_name, tuple(_strip(p) for p in mod.ports), clock.name, reset.name,
                      _is_active_low(reset.name))


def _strip(p: PortDecl) -> PortDecl:
    # The XML carries no net kind, so specs normalise it: inputs are wires,
    # outputs regs (the shape of the generated wrapper). Ranges become [w-1:0].
    kind = "wire" if p.direction == "input" else "reg"
    return PortDecl(p.name, p.direction, kind, p.width - 1, 0)


def write_spec_xml(spec: DesignSpec) -> str:
    lines = [
        f"<design top={quoteattr(spec.top)} clock={quoteattr(spec.clock)} "
        f"reset={quoteattr(spec.reset)} reset_polarity=\"{spec.reset_polarity}\">"
    ]
    for p in spec.ports:
        d = "in" if p.direction == "input" else "out"
        lines.append(f"  <port name={quoteattr(p.name)} dir=\"{d}\" width=\"{p.width}\"/>")
    lines.append("</design>")
    return "\n".join(lines) + "\n"


def read_spec_xml(text: str) -> DesignSpec:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise SpecError("malformed", f"bad XML: {exc}") from None

    def attr(el, key):
        v = el.get(key)
        if v is None:
            raise SpecError("schema-violation", f"<{el.tag}> lacks attribute '{key}'")
        return v

    def name(el, key):
        v = attr(el, key)
        if not _NAME.match(v):
            raise SpecError("schema-violation", f"invalid identifier {v!r} in '{key}'")
        return v

    if root.tag != "design":
        raise SpecError("schema-violation", f"root element must be <design>, got <{root.tag}>")
    pol = attr(root, "reset_polarity")
    if pol not in ("low", "high"):
        raise SpecError("schema-violation", f"reset_polarity must be low|high, got {pol!r}")
    ports = []
    for el in root:
        if el.tag != "port":
            raise SpecError("schema-violation", f"unexpected element <{el.tag}>")
        d = attr(el, "dir")
        if d not in ("in", "out"):
            raise SpecError("schema-violation", f"port dir must be in|out, got {d!r}")
        w = attr(el, "width")
        if not w.isdigit() or int(w) < 1:
            raise SpecError("schema-violation", f"port width must be a positive integer, got {w!r}")
        direction = "input" if d == "in" else "output"
        kind = "wire" if direction == "input" else "reg"
        ports.append(PortDecl(name(el, "name"), direction, kind, int(w) - 1, 0))
    try:
        return DesignSpec(name(root, "top"), tuple(ports), name(root, "clock"), name(root, "reset"),
                          pol == "low")
    except SpecError as exc:
        if exc.category == "clock-reset-collision":
            raise SpecError("schema-violation", exc.message) from None
        raise
