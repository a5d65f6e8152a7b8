"""AST node types for the supported Verilog subset.

Source spans are ``(line, col)`` tuples and never take part in equality, so
two trees parsed from differently formatted text compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

Span = Optional[Tuple[int, int]]


@dataclass(frozen=True)
class Node:
    span: Span = field(default=None, compare=False, repr=False, kw_only=True)


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Num(Node):
    value: int
    width: Optional[int] = None  # None: unsized literal, 32 bits


@dataclass(frozen=True)
class Ident(Node):
    name: str


@dataclass(frozen=True)
class Index(Node):
    """Bit select ``name[index]``; the index may be dynamic."""
    name: str
    index: "Expr"


@dataclass(frozen=True)
class Slice(Node):
    """Constant part select ``name[msb:lsb]``."""
    name: str
    msb: int
    lsb: int


@dataclass(frozen=True)
class Concat(Node):
    parts: Tuple["Expr", ...]


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Ternary(Node):
    cond: "Expr"
    then: "Expr"
    other: "Expr"


Expr = Num | Ident | Index | Slice | Concat | Unary | Binary | Ternary


# -- statements --------------------------------------------------------------

@dataclass(frozen=True)
class Block(Node):
    stmts: Tuple["Stmt", ...] = ()


@dataclass(frozen=True)
class If(Node):
    cond: Expr
    then: "Stmt"
    other: Optional["Stmt"] = None


@dataclass(frozen=True)
class CaseItem(Node):
    labels: Tuple[Expr, ...]
    body: "Stmt"


@dataclass(frozen=True)
class Case(Node):
    subject: Expr
    items: Tuple[CaseItem, ...]
    default: Optional["Stmt"] = None


@dataclass(frozen=True)
class Assign(Node):
    lhs: Expr
    rhs: Expr
    blocking: bool = True


@dataclass(frozen=True)
class Wait(Node):
    """``@(posedge clk);`` -- testbench-only statement."""
    edge: str
    name: str


@dataclass(frozen=True)
class Finish(Node):
    pass


Stmt = Block | If | Case | Assign | Wait | Finish


# -- module items ------------------------------------------------------------

@dataclass(frozen=True)
class PortDecl(Node):
    name: str
    direction: str  # "input" | "output"
    kind: str = "wire"  # "wire" | "reg"
    msb: int = 0
    lsb: int = 0

    @property
    def width(self) -> int:
        return self.msb - self.lsb + 1


@dataclass(frozen=True)
class NetDecl(Node):
    name: str
    kind: str
    msb: int = 0
    lsb: int = 0
    init: Optional[Expr] = None

    @property
    def width(self) -> int:
        return self.msb - self.lsb + 1


@dataclass(frozen=True)
class ParamDecl(Node):
    name: str
    value: Expr
    local: bool = True


@dataclass(frozen=True)
class ContAssign(Node):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Always(Node):
    sensitivity: Tuple[Tuple[str, str], ...]  # ((edge, signal), ...)
    body: Stmt


@dataclass(frozen=True)
class ClockGen(Node):
    """``always #N clk = ~clk;`` -- testbench-only clock generator."""
    name: str
    half_period: int


@dataclass(frozen=True)
class Initial(Node):
    body: Stmt


@dataclass(frozen=True)
class Instance(Node):
    module: str
    name: str
    connections: Tuple[Tuple[str, Optional[Expr]], ...] = ()


@dataclass(frozen=True)
class AssertionDecl(Node):
    clock_edge: str
    clock: str
    antecedent: Expr
    consequent: Expr
    disable: Optional[Expr] = None
    label: Optional[str] = None


Item = NetDecl | ParamDecl | ContAssign | Always | ClockGen | Initial | Instance | AssertionDecl


@dataclass(frozen=True)
class SourceModule(Node):
    name: str
    ports: Tuple[PortDecl, ...] = ()
    items: Tuple[Item, ...] = ()

    def port(self, name: str) -> Optional[PortDecl]:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    @property
    def assertions(self) -> Tuple[AssertionDecl, ...]:
        return tuple(i for i in self.items if isinstance(i, AssertionDecl))

    @property
    def instances(self) -> Tuple[Instance, ...]:
        return tuple(i for i in self.items if isinstance(i, Instance))

    @property
    def params(self) -> Tuple[ParamDecl, ...]:
        return tuple(i for i in self.items if isinstance(i, ParamDecl))


def walk_expr(e):
    """Yield ``e`` and all sub-expressions, pre-order."""
    yield e
    if isinstance(e, Index):
        yield from walk_expr(e.index)
    elif isinstance(e, Concat):
        for p in e.parts:
            yield from walk_expr(p)
    elif isinstance(e, Unary):
        yield from walk_expr(e.operand)
    elif isinstance(e, Binary):
        yield from walk_expr(e.left)
        yield from walk_expr(e.right)
    elif isinstance(e, Ternary):
        yield from walk_expr(e.cond)
        yield from walk_expr(e.then)
        yield from walk_expr(e.other)


def expr_names(e):
    """Names of all signals/parameters referenced by ``e``."""
    out = []
    for sub in walk_expr(e):
        if isinstance(sub, (Ident, Index, Slice)):
            out.append(sub.name)
    return out


def walk_stmt(s):
    yield s
    if isinstance(s, Block):
        for x in s.stmts:
            yield from walk_stmt(x)
    elif isinstance(s, If):
        yield from walk_stmt(s.then)
        if s.other is not None:
            yield from walk_stmt(s.other)
    elif isinstance(s, Case):
        for it in s.items:
            yield from walk_stmt(it.body)
        if s.default is not None:
            yield from walk_stmt(s.default)
