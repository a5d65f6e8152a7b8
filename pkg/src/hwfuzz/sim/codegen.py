"""Lower a netlist to Python source and compile it.

Each continuous-assign network becomes one ``settle(v)`` function, each
process a ``proc_<i>(v, nba, fired)`` function and each assertion an
``assert_<i>(v)`` predicate. ``v`` is the flat list of signal values.
Coverage instrumentation is emitted inline as ``fired.append(<point>)``.
"""
from __future__ import annotations

import itertools
from types import SimpleNamespace

from ..errors import SimTrap
from . import ir


def _mask(w):
    return (1 << w) - 1


def _div(a, b, span):
    if b == 0:
        raise SimTrap("div-by-zero", "division by zero", span)
    return a // b


def _mod(a, b, span):
    if b == 0:
        raise SimTrap("div-by-zero", "modulo by zero", span)
    return a % b


def _bit(val, idx, width, lsb, span):
    k = idx - lsb
    if k < 0 or k >= width:
        raise SimTrap("oob-select", f"bit select index {idx} out of range", span)
    return val >> k & 1


def _idx(idx, width, lsb, span):
    k = idx - lsb
    if k < 0 or k >= width:
        raise SimTrap("oob-select", f"bit select index {idx} out of range", span)
    return k


def _shl(a, b, w):
    return (a << b) & ((1 << w) - 1) if b < w else 0


HELPERS = {"_div": _div, "_mod": _mod, "_bit": _bit, "_idx": _idx, "_shl": _shl}

_PYCMP = {"==": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def gen_expr(e, w: int) -> str:
    """Python expression computing ``e`` in a context of width ``w`` (w >= e.width)."""
    if isinstance(e, ir.Const):
        return str(e.value & _mask(w))
    if isinstance(e, ir.Sig):
        return f"v[{e.sid}]"
    if isinstance(e, ir.Part):
        return f"(v[{e.sid}] >> {e.offset} & {_mask(e.width)})"
    if isinstance(e, ir.Bit):
        return f"_bit(v[{e.sid}], {gen_expr(e.index, e.index.width)}, {e.sig_width}, {e.lsb}, {e.span!r})"
    if isinstance(e, ir.Cat):
        terms = []
        shift = e.width
        for p in e.parts:
            shift -= p.width
            code = gen_expr(p, p.width)
            terms.append(f"{code} << {shift}" if shift else code)
        return "(" + " | ".join(terms) + ")"
    if isinstance(e, ir.Un):
        x = e.operand
        if e.op == "~":
            return f"(~{gen_expr(x, w)} & {_mask(w)})"
        if e.op == "-":
            return f"(-{gen_expr(x, w)} & {_mask(w)})"
        inner = gen_expr(x, x.width)
        if e.op == "!":
            return f"(0 if {inner} else 1)"
        if e.op == "&":
            return f"(1 if {inner} == {_mask(x.width)} else 0)"
        if e.op == "|":
            return f"(1 if {inner} else 0)"
        if e.op == "^":
            return f"(({inner}).bit_count() & 1)"
        raise ValueError(e.op)
    if isinstance(e, ir.Bin):
        op = e.op
        if op in _PYCMP:
            ww = max(e.left.width, e.right.width)
            return f"(1 if {gen_expr(e.left, ww)} {_PYCMP[op]} {gen_expr(e.right, ww)} else 0)"
        if op in ("&&", "||"):
            a = gen_expr(e.left, e.left.width)
            b = gen_expr(e.right, e.right.width)
            return f"(1 if ({a} {'and' if op == '&&' else 'or'} {b}) else 0)"
        if op == "<<":
            return f"_shl({gen_expr(e.left, w)}, {gen_expr(e.right, e.right.width)}, {w})"
        if op == ">>":
            return f"({gen_expr(e.left, w)} >> {gen_expr(e.right, e.right.width)})"
        a, b = gen_expr(e.left, w), gen_expr(e.right, w)
        if op in ("+", "-", "*"):
            return f"(({a} {op} {b}) & {_mask(w)})"
        if op in ("&", "|", "^"):
            return f"({a} {op} {b})"
        if op == "/":
            return f"_div({a}, {b}, {e.span!r})"
        if op == "%":
            return f"_mod({a}, {b}, {e.span!r})"
        raise ValueError(op)
    if isinstance(e, ir.Tern):
        return f"({gen_expr(e.then, w)} if {gen_expr(e.cond, e.cond.width)} else {gen_expr(e.other, w)})"
    raise TypeError(e)


def eval_const(e, width=None) -> int:
    return eval(gen_expr(e, width or e.width), dict(HELPERS), {"v": ()})


class _Emitter:
    def __init__(self):
        self.lines: list[str] = []
        self.tmp = itertools.count()

    def emit(self, ind, text):
        self.lines.append("    " * ind + text)

    def assign(self, s: ir.SAssign | tuple, ind, nonblocking=False, fired=True):
        lhs, rhs = s.lhs, s.rhs
        if fired and s.point >= 0:
            self.emit(ind, f"fired.append({s.point})")
        lw = lhs.width
        val = gen_expr(rhs, max(lw, rhs.width))
        if rhs.width > lw:
            val = f"({val} & {_mask(lw)})"
        if len(lhs.parts) == 1 and lhs.parts[0].index is None:
            src = val
        else:
            src = f"_t{next(self.tmp)}"
            self.emit(ind, f"{src} = {val}")
        shift = 0
        for p in reversed(lhs.parts):
            piece = src if len(lhs.parts) == 1 else f"({src} >> {shift} & {_mask(p.width)})"
            shift += p.width
            if p.index is not None:
                k = f"_k{next(self.tmp)}"
                self.emit(ind, f"{k} = _idx({gen_expr(p.index, p.index.width)}, {p.sig_width}, {p.lsb}, {p.span!r})")
                off = k
            else:
                off = str(p.offset)
            if nonblocking:
                self.emit(ind, f"nba.append(({p.sid}, {off}, {p.width}, {piece}))")
            elif p.index is None and p.offset == 0 and p.width == p.sig_width:
                self.emit(ind, f"v[{p.sid}] = {piece}")
            else:
                clear = f"~({_mask(p.width)} << {off})"
                self.emit(ind, f"v[{p.sid}] = (v[{p.sid}] & {clear}) | ({piece} << {off})")

    def stmt(self, s, ind):
        start = len(self.lines)
        if isinstance(s, ir.SBlock):
            for x in s.stmts:
                self.stmt(x, ind)
        elif isinstance(s, ir.SIf):
            self.emit(ind, f"if {gen_expr(s.cond, s.cond.width)}:")
            self.emit(ind + 1, f"fired.append({s.point_true})")
            self.stmt(s.then, ind + 1)
            self.emit(ind, "else:")
            self.emit(ind + 1, f"fired.append({s.point_false})")
            if s.other is not None:
                self.stmt(s.other, ind + 1)
        elif isinstance(s, ir.SCase):
            ww = max([s.subject.width] + [lab.width for labels, _, _ in s.items for lab in labels])
            subj = f"_c{next(self.tmp)}"
            self.emit(ind, f"{subj} = {gen_expr(s.subject, ww)}")
            kw = "if"
            for labels, body, point in s.items:
                cond = " or ".join(f"{subj} == {gen_expr(lab, ww)}" for lab in labels)
                self.emit(ind, f"{kw} {cond}:")
                self.emit(ind + 1, f"fired.append({point})")
                self.stmt(body, ind + 1)
                kw = "elif"
            if s.items:
                self.emit(ind, "else:")
                self.emit(ind + 1, f"fired.append({s.point_default})")
                if s.default is not None:
                    self.stmt(s.default, ind + 1)
            else:
                self.emit(ind, f"fired.append({s.point_default})")
                if s.default is not None:
                    self.stmt(s.default, ind)
        elif isinstance(s, ir.SAssign):
            self.assign(s, ind, nonblocking=not s.blocking)
        else:
            raise TypeError(s)
        if len(self.lines) == start:
            self.emit(ind, "pass")


def compile_netlist(nl) -> SimpleNamespace:
    em = _Emitter()
    em.emit(0, "def settle(v):")
    for ca in nl.cont_assigns:
        em.assign(SimpleNamespace(lhs=ca.lhs, rhs=ca.rhs, point=-1), 1)
    em.emit(1, "return")
    for i, proc in enumerate(nl.processes):
        em.emit(0, f"def proc_{i}(v, nba, fired):")
        em.stmt(proc.body, 1)
    for a in nl.assertions:
        em.emit(0, f"def assert_{a.id}(v):")
        if a.disable is not None:
            em.emit(1, f"if {gen_expr(a.disable, a.disable.width)}:")
            em.emit(2, "return False")
        em.emit(1, f"return bool({gen_expr(a.antecedent, a.antecedent.width)}) and "
                   f"not {gen_expr(a.consequent, a.consequent.width)}")
    segments = [[]]
    for s in nl.initial:
        if isinstance(s, ir.SWait):
            segments.append([])
        else:
            segments[-1].append(s)
    seg_finish = []
    for i, seg in enumerate(segments):
        em.emit(0, f"def segment_{i}(v):")
        finish = False
        for s in seg:
            if isinstance(s, ir.SFinish):
                finish = True
                break
            em.assign(s, 1, fired=False)
        em.emit(1, "return")
        seg_finish.append(finish)
    source = "\n".join(em.lines) + "\n"
    ns = dict(HELPERS)
    exec(compile(source, f"<netlist {nl.top}>", "exec"), ns)
    return SimpleNamespace(
        source=source,
        settle=ns["settle"],
        procs=[ns[f"proc_{i}"] for i in range(len(nl.processes))],
        asserts=[ns[f"assert_{a.id}"] for a in nl.assertions],
        segments=[ns[f"segment_{i}"] for i in range(len(segments))] if nl.initial else [],
        segment_finish=seg_finish if nl.initial else [],
        widths=[s.width for s in nl.signals],
    )
