"""Resolved, width-annotated IR produced by elaboration.

Expressions refer to signals by dense integer id. Widths follow Verilog's
self-determined sizing; the code generator applies context widths.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

Span = Optional[Tuple[int, int]]


@dataclass(frozen=True)
class Const:
    value: int
    width: int


@dataclass(frozen=True)
class Sig:
    sid: int
    width: int


@dataclass(frozen=True)
class Bit:
    """Single-bit select. ``lsb`` is the declared low index of the signal."""
    sid: int
    index: "Expr"
    sig_width: int
    lsb: int
    span: Span = None
    width: int = 1


@dataclass(frozen=True)
class Part:
    sid: int
    offset: int  # already relative to the declared lsb
    width: int


@dataclass(frozen=True)
class Cat:
    parts: Tuple["Expr", ...]
    width: int


@dataclass(frozen=True)
class Un:
    op: str
    operand: "Expr"
    width: int


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"
    width: int
    span: Span = None


@dataclass(frozen=True)
class Tern:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    width: int


Expr = Const | Sig | Bit | Part | Cat | Un | Bin | Tern


@dataclass(frozen=True)
class LvPart:
    """One assignable slice. ``index`` set means a dynamic single-bit target."""
    sid: int
    offset: int
    width: int
    sig_width: int
    index: Optional[Expr] = None
    lsb: int = 0
    span: Span = None


@dataclass(frozen=True)
class LValue:
    parts: Tuple[LvPart, ...]  # MSB first, as written in a concatenation

    @property
    def width(self) -> int:
        return sum(p.width for p in self.parts)


@dataclass(frozen=True)
class SAssign:
    lhs: LValue
    rhs: Expr
    blocking: bool
    point: int


@dataclass(frozen=True)
class SIf:
    cond: Expr
    then: "Stmt"
    other: Optional["Stmt"]
    point_true: int
    point_false: int


@dataclass(frozen=True)
class SCase:
    subject: Expr
    items: Tuple[Tuple[Tuple[Expr, ...], "Stmt", int], ...]
    default: Optional["Stmt"]
    point_default: int


@dataclass(frozen=True)
class SBlock:
    stmts: Tuple["Stmt", ...]


@dataclass(frozen=True)
class SWait:
    edge: str
    sid: int


@dataclass(frozen=True)
class SFinish:
    pass


Stmt = SAssign | SIf | SCase | SBlock | SWait | SFinish
