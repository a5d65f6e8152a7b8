"""Elaboration: flatten a module hierarchy into an instrumented netlist."""
from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field
from typing import Optional, Tuple

from ..errors import ElaborationError
from ..rtl import ast as A
from ..rtl.spec import DesignSpec
from . import ir

STATEMENT_KINDS = frozenset({"statement", "cont-assign"})
BRANCH_KINDS = frozenset({"branch-true", "branch-false", "case-item", "case-default"})

_CMP = frozenset({"==", "!=", "<", "<=", ">", ">=", "&&", "||"})


@dataclass(frozen=True)
class Signal:
    sid: int
    name: str
    width: int
    kind: str
    init: int = 0
    lsb: int = 0


@dataclass(frozen=True)
class CovPoint:
    id: int
    kind: str
    span: ir.Span
    weight: int
    path: str  # instance prefix, "" for the top module
    local: int  # index among the points of that module instance

    @property
    def is_statement(self) -> bool:
        return self.kind in STATEMENT_KINDS

    @property
    def is_branch(self) -> bool:
        return self.kind in BRANCH_KINDS


@dataclass(frozen=True)
class ContAssign:
    lhs: ir.LValue
    rhs: ir.Expr
    point: int  # -1 for implicit port connections
    span: ir.Span = None


@dataclass(frozen=True)
class Process:
    sensitivity: Tuple[Tuple[str, int], ...]
    body: ir.Stmt
    points: Tuple[int, ...]
    writes: frozenset


@dataclass(frozen=True)
class Assertion:
    id: int
    clock_edge: str
    clock: int
    antecedent: ir.Expr
    consequent: ir.Expr
    disable: Optional[ir.Expr]
    span: ir.Span = None
    label: Optional[str] = None


@dataclass(frozen=True)
class Netlist:
    top: str
    signals: Tuple[Signal, ...]
    cont_assigns: Tuple[ContAssign, ...]
    processes: Tuple[Process, ...]
    assertions: Tuple[Assertion, ...]
    cov_points: Tuple[CovPoint, ...]
    spec: Optional[DesignSpec]
    clock: int
    reset: Optional[int]
    inputs: Tuple[int, ...]  # stimulus-driven signal ids, declaration order
    initial: Tuple[ir.Stmt, ...] = ()  # testbench initial-block statements
    model: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        from .codegen import compile_netlist
        object.__setattr__(self, "model", compile_netlist(self))

    def signal(self, name: str) -> Signal:
        for s in self.signals:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def point_kinds(self) -> Tuple[str, ...]:
        return tuple(p.kind for p in self.cov_points)

    @property
    def n_statement_points(self) -> int:
        return sum(p.is_statement for p in self.cov_points)

    @property
    def n_branch_points(self) -> int:
        return sum(p.is_branch for p in self.cov_points)

    @property
    def weights(self) -> Tuple[int, ...]:
        return tuple(p.weight for p in self.cov_points)

    @property
    def hash(self) -> bytes:
        h = self.__dict__.get("_hash")
        if h is None:
            blob = repr((self.top, self.signals, self.cont_assigns, self.processes,
                         self.assertions, [(p.kind, p.path, p.local) for p in self.cov_points]))
            h = hashlib.sha256(blob.encode()).digest()
            object.__setattr__(self, "_hash", h)
        return h

    @property
    def is_testbench(self) -> bool:
        return self.spec is None


def elaborate(modules, spec: DesignSpec) -> Netlist:
    """Flatten ``spec.top`` into an instrumented netlist driven by stimulus."""
    by_name = {m.name: m for m in modules}
    if spec.top not in by_name:
        raise ElaborationError("missing-module", f"top module '{spec.top}' not found")
    e = _Elab(by_name, testbench=False)
    e.module(by_name[spec.top], "", ())
    top_ports = {p.name: e.by_name[p.name] for p in by_name[spec.top].ports}
    for p in spec.ports:
        sid = top_ports.get(p.name)
        if sid is None or e.signals[sid]["width"] != p.width:
            raise ElaborationError("port-connection-mismatch",
                                   f"spec port '{p.name}' does not match module '{spec.top}'")
    inputs = [p.name for p in spec.ports if p.direction == "input"]
    for name in inputs:
        if top_ports[name] in e.driven:
            raise ElaborationError("illegal-driver", f"top-level input '{name}' is driven inside the design")
    data = tuple(top_ports[p.name] for p in spec.data_inputs)
    return e.finish(spec.top, spec, top_ports[spec.clock], top_ports[spec.reset], data)


def elaborate_testbench(modules, top: str) -> Netlist:
    """Flatten a self-driving testbench (clock generator + initial block)."""
    by_name = {m.name: m for m in modules}
    if top not in by_name:
        raise ElaborationError("missing-module", f"testbench module '{top}' not found")
    e = _Elab(by_name, testbench=True)
    e.module(by_name[top], "", ())
    if e.clockgen is None:
        raise ElaborationError("unsupported-in-design", f"testbench '{top}' has no clock generator")
    return e.finish(top, None, e.clockgen, None, (), initial=e.initial)


class _Elab:
    def __init__(self, modules, testbench):
        self.modules = modules
        self.testbench = testbench
        self.signals: list[dict] = []
        self.by_name: dict[str, int] = {}
        self.conts: list[tuple] = []  # (ContAssign, reads)
        self.procs: list[Process] = []
        self.asserts: list[Assertion] = []
        self.assert_reads: set[int] = set()
        self.points: list[dict] = []
        self.driven: dict[int, str] = {}  # sid -> "cont" | "proc" | "init"
        self.clockgen: Optional[int] = None
        self.initial: tuple = ()

    # -- signals & points ----------------------------------------------------
    def add_signal(self, name, width, kind, lsb, node):
        if name in self.by_name:
            raise ElaborationError("duplicate-name", f"signal '{name}' declared twice", *(node.span or (None, None)))
        sid = len(self.signals)
        self.signals.append(dict(name=name, width=width, kind=kind, init=0, lsb=lsb))
        self.by_name[name] = sid
        return sid

    def alloc(self, kind, span, ctx):
        pid = len(self.points)
        self.points.append(dict(kind=kind, span=span, path=ctx["prefix"], local=ctx["nlocal"]))
        ctx["nlocal"] += 1
        return pid

    def drive(self, sid, how, node):
        prev = self.driven.get(sid)
        if prev is not None and prev != how:
            name = self.signals[sid]["name"]
            raise ElaborationError("illegal-driver", f"'{name}' is driven both by {prev} and {how}",
                                   *(node.span or (None, None)))
        self.driven[sid] = how

    # -- module flattening ---------------------------------------------------
    def module(self, mod: A.SourceModule, prefix: str, stack):
        if mod.name in stack:
            raise ElaborationError("missing-module", f"recursive instantiation of '{mod.name}'")
        stack = stack + (mod.name,)
        scope: dict[str, int] = {}
        params: dict[str, tuple[int, int]] = {}
        ctx = dict(prefix=prefix, nlocal=0, scope=scope, params=params)
        for p in mod.ports:
            scope[p.name] = self.add_signal(prefix + p.name, p.width, p.kind, p.lsb, p)
        for it in mod.items:
            if isinstance(it, A.NetDecl):
                scope[it.name] = self.add_signal(prefix + it.name, it.width, it.kind, it.lsb, it)
            elif isinstance(it, A.ParamDecl):
                c = self.expr(it.value, ctx)
                value = _const(c)
                if value is None:
                    raise ElaborationError("width-mismatch", f"parameter '{it.name}' is not constant")
                params[it.name] = (value, c.width)
        for it in mod.items:
            if isinstance(it, A.NetDecl) and it.init is not None:
                sid = scope[it.name]
                if it.kind == "reg":
                    c = self.expr(it.init, ctx)
                    value = _const(c, max(c.width, it.width))
                    if value is None:
                        raise ElaborationError("width-mismatch", f"initializer of '{it.name}' is not constant")
                    self.signals[sid]["init"] = value & ((1 << it.width) - 1)
                else:
                    self.cont_assign(A.Ident(it.name, span=it.span), it.init, ctx, it)
            elif isinstance(it, A.ContAssign):
                self.cont_assign(it.lhs, it.rhs, ctx, it)
            elif isinstance(it, A.Always):
                self.always(it, ctx)
            elif isinstance(it, A.Instance):
                self.instance(it, ctx, stack)
            elif isinstance(it, A.AssertionDecl):
                self.assertion(it, ctx)
            elif isinstance(it, A.ClockGen):
                if not self.testbench or prefix:
                    raise ElaborationError("unsupported-in-design", "clock generators are testbench-only",
                                           *(it.span or (None, None)))
                if self.clockgen is not None:
                    raise ElaborationError("unsupported-in-design", "more than one clock generator")
                sid = scope[it.name]
                if self.signals[sid]["kind"] != "reg" or self.signals[sid]["width"] != 1:
                    raise ElaborationError("illegal-driver", f"clock '{it.name}' must be a 1-bit reg")
                self.drive(sid, "init", it)
                self.clockgen = sid
            elif isinstance(it, A.Initial):
                if not self.testbench or prefix:
                    raise ElaborationError("unsupported-in-design", "initial blocks are testbench-only",
                                           *(it.span or (None, None)))
                self.initial_block(it, ctx)
        return scope

    def instance(self, inst: A.Instance, ctx, stack):
        child = self.modules.get(inst.module)
        if child is None:
            raise ElaborationError("missing-module", f"module '{inst.module}' is not defined",
                                   *(inst.span or (None, None)))
        cprefix = ctx["prefix"] + inst.name + "."
        cscope = self.module(child, cprefix, stack)
        conns = dict(inst.connections)
        for name in conns:
            if child.port(name) is None:
                raise ElaborationError("port-connection-mismatch",
                                       f"'{inst.module}' has no port '{name}'", *(inst.span or (None, None)))
        for p in child.ports:
            e = conns.get(p.name)
            port_sid = cscope[p.name]
            port_sig = ir.Sig(port_sid, p.width)
            if p.direction == "input":
                if e is None:
                    raise ElaborationError("port-connection-mismatch",
                                           f"input '{p.name}' of '{inst.name}' is unconnected",
                                           *(inst.span or (None, None)))
                rhs = self.expr(e, ctx)
                unsized = isinstance(e, A.Num) and e.width is None
                if not unsized and rhs.width != p.width:
                    raise ElaborationError("width-mismatch",
                                           f"{rhs.width}-bit value connected to {p.width}-bit port "
                                           f"'{inst.name}.{p.name}'", *(inst.span or (None, None)))
                lv = ir.LValue((ir.LvPart(port_sid, 0, p.width, p.width),))
                self.drive(port_sid, "cont", inst)
                self.conts.append((ContAssign(lv, rhs, -1, inst.span), self.reads(rhs)))
            else:
                if e is None:
                    continue
                if not _is_lvalue(e):
                    raise ElaborationError("port-connection-mismatch",
                                           f"output '{p.name}' of '{inst.name}' must connect to a net",
                                           *(inst.span or (None, None)))
                lv = self.lvalue(e, ctx, "cont", inst)
                if lv.width != p.width:
                    raise ElaborationError("width-mismatch",
                                           f"{lv.width}-bit net connected to {p.width}-bit port "
                                           f"'{inst.name}.{p.name}'", *(inst.span or (None, None)))
                self.conts.append((ContAssign(lv, port_sig, -1, inst.span), {port_sid} | self.lv_reads(lv)))

    def cont_assign(self, lhs, rhs, ctx, node):
        lv = self.lvalue(lhs, ctx, "cont", node)
        r = self.expr(rhs, ctx)
        pid = self.alloc("cont-assign", node.span, ctx)
        self.conts.append((ContAssign(lv, r, pid, node.span), self.reads(r) | self.lv_reads(lv)))

    def always(self, it: A.Always, ctx):
        sens = []
        for edge, name in it.sensitivity:
            sens.append((edge, ctx["scope"][name]))
        first = len(self.points)
        writes: set[int] = set()
        body = self.stmt(it.body, ctx, writes)
        self.procs.append(Process(tuple(sens), body, tuple(range(first, len(self.points))), frozenset(writes)))

    def assertion(self, it: A.AssertionDecl, ctx):
        clock = ctx["scope"][it.clock]
        ante = self.expr(it.antecedent, ctx)
        cons = self.expr(it.consequent, ctx)
        dis = None if it.disable is None else self.expr(it.disable, ctx)
        for e in (ante, cons, dis):
            if e is not None:
                self.assert_reads |= self.reads(e)
        self.asserts.append(Assertion(len(self.asserts), it.clock_edge, clock, ante, cons, dis, it.span, it.label))

    def initial_block(self, it: A.Initial, ctx):
        if self.initial:
            raise ElaborationError("unsupported-in-design", "more than one initial block")
        body = it.body.stmts if isinstance(it.body, A.Block) else (it.body,)
        out = []
        for s in body:
            if isinstance(s, A.Assign):
                if not s.blocking:
                    raise ElaborationError("unsupported-in-design", "initial blocks take blocking assignments only",
                                           *(s.span or (None, None)))
                lv = self.lvalue(s.lhs, ctx, "init", s, need_reg=True)
                out.append(ir.SAssign(lv, self.expr(s.rhs, ctx), True, -1))
            elif isinstance(s, A.Wait):
                sid = ctx["scope"][s.name]
                if sid != self.clockgen or s.edge != "negedge":
                    raise ElaborationError("unsupported-in-design",
                                           "initial blocks may only wait on @(negedge <generated clock>)",
                                           *(s.span or (None, None)))
                out.append(ir.SWait(s.edge, sid))
            elif isinstance(s, A.Finish):
                out.append(ir.SFinish())
            else:
                raise ElaborationError("unsupported-in-design",
                                       "initial blocks take assignments, waits and $finish only",
                                       *(s.span or (None, None)))
        self.initial = tuple(out)

    # -- statements ----------------------------------------------------------
    def stmt(self, s, ctx, writes):
        if isinstance(s, A.Block):
            return ir.SBlock(tuple(self.stmt(x, ctx, writes) for x in s.stmts))
        if isinstance(s, A.If):
            cond = self.expr(s.cond, ctx)
            pt = self.alloc("branch-true", s.span, ctx)
            then = self.stmt(s.then, ctx, writes)
            pf = self.alloc("branch-false", (s.other.span if s.other is not None else None) or s.span, ctx)
            other = None if s.other is None else self.stmt(s.other, ctx, writes)
            return ir.SIf(cond, then, other, pt, pf)
        if isinstance(s, A.Case):
            subject = self.expr(s.subject, ctx)
            items = []
            for item in s.items:
                labels = tuple(self.expr(x, ctx) for x in item.labels)
                p = self.alloc("case-item", item.span, ctx)
                items.append((labels, self.stmt(item.body, ctx, writes), p))
            pd = self.alloc("case-default", (s.default.span if s.default is not None else None) or s.span, ctx)
            default = None if s.default is None else self.stmt(s.default, ctx, writes)
            return ir.SCase(subject, tuple(items), default, pd)
        if isinstance(s, A.Assign):
            lv = self.lvalue(s.lhs, ctx, "proc", s, need_reg=True)
            writes.update(p.sid for p in lv.parts)
            rhs = self.expr(s.rhs, ctx)
            return ir.SAssign(lv, rhs, s.blocking, self.alloc("statement", s.span, ctx))
        raise ElaborationError("unsupported-in-design", f"{type(s).__name__} is testbench-only",
                               *(s.span or (None, None)))

    # -- expressions ---------------------------------------------------------
    def lvalue(self, e, ctx, how, node, need_reg=False) -> ir.LValue:
        parts = []
        for x in (e.parts if isinstance(e, A.Concat) else (e,)):
            if isinstance(x, A.Concat):
                parts.extend(self.lvalue(x, ctx, how, node, need_reg).parts)
                continue
            sid = ctx["scope"].get(x.name)
            if sid is None:
                raise ElaborationError("illegal-driver", f"cannot assign to '{x.name}'", *(x.span or (None, None)))
            sig = self.signals[sid]
            if need_reg and sig["kind"] != "reg":
                raise ElaborationError("illegal-driver", f"procedural assignment to wire '{sig['name']}'",
                                       *(x.span or (None, None)))
            self.drive(sid, how, node)
            w = sig["width"]
            if isinstance(x, A.Ident):
                parts.append(ir.LvPart(sid, 0, w, w))
            elif isinstance(x, A.Slice):
                parts.append(ir.LvPart(sid, x.lsb - sig["lsb"], x.msb - x.lsb + 1, w))
            else:
                idx = self.expr(x.index, ctx)
                k = _const(idx)
                if k is not None and sig["lsb"] <= k < sig["lsb"] + w:
                    parts.append(ir.LvPart(sid, k - sig["lsb"], 1, w))
                else:
                    parts.append(ir.LvPart(sid, 0, 1, w, idx, sig["lsb"], x.span))
        return ir.LValue(tuple(parts))

    def expr(self, e, ctx) -> ir.Expr:
        if isinstance(e, A.Num):
            return ir.Const(e.value, e.width or 32)
        if isinstance(e, A.Ident):
            sid = ctx["scope"].get(e.name)
            if sid is not None:
                return ir.Sig(sid, self.signals[sid]["width"])
            value, width = ctx["params"][e.name]
            return ir.Const(value, width)
        if isinstance(e, A.Index):
            sid = ctx["scope"][e.name]
            sig = self.signals[sid]
            idx = self.expr(e.index, ctx)
            k = _const(idx)
            if k is not None and sig["lsb"] <= k < sig["lsb"] + sig["width"]:
                return ir.Part(sid, k - sig["lsb"], 1)
            return ir.Bit(sid, idx, sig["width"], sig["lsb"], e.span)
        if isinstance(e, A.Slice):
            sid = ctx["scope"][e.name]
            return ir.Part(sid, e.lsb - self.signals[sid]["lsb"], e.msb - e.lsb + 1)
        if isinstance(e, A.Concat):
            parts = tuple(self.expr(p, ctx) for p in e.parts)
            return ir.Cat(parts, sum(p.width for p in parts))
        if isinstance(e, A.Unary):
            x = self.expr(e.operand, ctx)
            w = x.width if e.op in ("~", "-") else 1
            return ir.Un(e.op, x, w)
        if isinstance(e, A.Binary):
            a, b = self.expr(e.left, ctx), self.expr(e.right, ctx)
            if e.op in _CMP:
                w = 1
            elif e.op in ("<<", ">>"):
                w = a.width
            else:
                w = max(a.width, b.width)
            return ir.Bin(e.op, a, b, w, e.span)
        if isinstance(e, A.Ternary):
            c, t, f = self.expr(e.cond, ctx), self.expr(e.then, ctx), self.expr(e.other, ctx)
            return ir.Tern(c, t, f, max(t.width, f.width))
        raise TypeError(e)

    @staticmethod
    def reads(e) -> set[int]:
        out = set()
        stack = [e]
        while stack:
            x = stack.pop()
            if isinstance(x, (ir.Sig, ir.Part)):
                out.add(x.sid)
            elif isinstance(x, ir.Bit):
                out.add(x.sid)
                stack.append(x.index)
            elif isinstance(x, ir.Cat):
                stack.extend(x.parts)
            elif isinstance(x, ir.Un):
                stack.append(x.operand)
            elif isinstance(x, ir.Bin):
                stack.extend((x.left, x.right))
            elif isinstance(x, ir.Tern):
                stack.extend((x.cond, x.then, x.other))
        return out

    def lv_reads(self, lv) -> set[int]:
        out = set()
        for p in lv.parts:
            if p.index is not None:
                out |= self.reads(p.index)
        return out

    # -- finishing -----------------------------------------------------------
    def finish(self, top, spec, clock, reset, inputs, initial=()) -> Netlist:
        conts = self.toposort()
        weights = self.weights(conts)
        signals = tuple(Signal(i, s["name"], s["width"], s["kind"], s["init"], s["lsb"])
                        for i, s in enumerate(self.signals))
        points = tuple(CovPoint(i, p["kind"], p["span"], weights[i], p["path"], p["local"])
                       for i, p in enumerate(self.points))
        return Netlist(top, signals, conts, tuple(self.procs), tuple(self.asserts), points, spec,
                       clock, reset, tuple(inputs), tuple(initial))

    def toposort(self) -> tuple:
        n = len(self.conts)
        drivers: dict[int, list[int]] = {}
        for i, (ca, _) in enumerate(self.conts):
            for p in ca.lhs.parts:
                drivers.setdefault(p.sid, []).append(i)
        succ = [set() for _ in range(n)]
        indeg = [0] * n
        for j, (_, reads) in enumerate(self.conts):
            for s in reads:
                for i in drivers.get(s, ()):
                    if j not in succ[i]:
                        succ[i].add(j)
                        indeg[j] += 1
        ready = [i for i in range(n) if indeg[i] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            i = heapq.heappop(ready)
            order.append(i)
            for j in sorted(succ[i]):
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(ready, j)
        if len(order) != n:
            stuck = sorted({self.signals[p.sid]["name"] for i in range(n) if indeg[i] > 0
                            for p in self.conts[i][0].lhs.parts})
            raise ElaborationError("comb-cycle", f"combinational loop through {', '.join(stuck)}")
        return tuple(self.conts[i][0] for i in order)

    def weights(self, conts) -> list[int]:
        # Signals feeding assertions, closed backwards over continuous assigns.
        need = set(self.assert_reads)
        changed = True
        reads_of = {id(ca): r for ca, r in self.conts}
        while changed:
            changed = False
            for ca in conts:
                if any(p.sid in need for p in ca.lhs.parts):
                    new = reads_of[id(ca)] - need
                    if new:
                        need |= new
                        changed = True
        w = [0] * len(self.points)
        for proc in self.procs:
            if proc.writes & need:
                for pid in proc.points:
                    w[pid] = 1
        for ca in conts:
            if ca.point >= 0 and any(p.sid in need for p in ca.lhs.parts):
                w[ca.point] = 1
        return w


def _is_lvalue(e) -> bool:
    if isinstance(e, A.Concat):
        return all(_is_lvalue(p) for p in e.parts)
    return isinstance(e, (A.Ident, A.Index, A.Slice))


def _const(e, width=None):
    """Value of a signal-free expression at ``width`` (default: its own), else None."""
    if _Elab.reads(e):
        return None
    from .codegen import eval_const
    from ..errors import SimTrap
    try:
        return eval_const(e, width)
    except SimTrap:
        return None
