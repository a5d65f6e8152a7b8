"""Naive reference interpreter for single-module designs.

Walks the parsed AST directly: no elaboration, no compiled code, no
coverage. Continuous assigns settle by repeated sweeps until nothing
changes. Only ``always @(posedge <clock>)`` processes are supported.
Used as the oracle the compiled simulator is checked against.
"""
from __future__ import annotations

from hwfuzz.rtl import ast as A


class RefTrap(Exception):
    def __init__(self, kind):
        super().__init__(kind)
        self.kind = kind


def _mask(w):
    return (1 << w) - 1


class RefSim:
    def __init__(self, module: A.SourceModule, clock: str, reset: str, reset_active: int):
        self.m = module
        self.clock, self.reset, self.reset_active = clock, reset, reset_active
        self.width = {}
        self.lsb = {}
        self.values = {}
        for p in module.ports:
            self.width[p.name] = p.msb - p.lsb + 1
            self.lsb[p.name] = p.lsb
            self.values[p.name] = 0
        for it in module.items:
            if isinstance(it, A.NetDecl):
                self.width[it.name] = it.msb - it.lsb + 1
                self.lsb[it.name] = it.lsb
                self.values[it.name] = 0
        for it in module.items:
            if isinstance(it, A.NetDecl) and it.init is not None:
                w = self.width[it.name]
                self.values[it.name] = self.ev(it.init, max(w, self.w(it.init))) & _mask(w)
        self.assigns = [it for it in module.items if isinstance(it, A.ContAssign)]
        self.procs = [it for it in module.items if isinstance(it, A.Always)]
        for p in self.procs:
            assert all(edge == "posedge" and name == clock for edge, name in p.sensitivity)
        self.nba = []

    # -- widths ------------------------------------------------------------
    def w(self, e) -> int:
        if isinstance(e, A.Num):
            return 32 if e.width is None else e.width
        if isinstance(e, A.Ident):
            return self.width[e.name]
        if isinstance(e, A.Index):
            return 1
        if isinstance(e, A.Slice):
            return e.msb - e.lsb + 1
        if isinstance(e, A.Concat):
            return sum(self.w(p) for p in e.parts)
        if isinstance(e, A.Unary):
            return self.w(e.operand) if e.op in ("~", "-", "+") else 1
        if isinstance(e, A.Binary):
            if e.op in ("==", "!=", "<", "<=", ">", ">=", "&&", "||"):
                return 1
            if e.op in ("<<", ">>"):
                return self.w(e.left)
            return max(self.w(e.left), self.w(e.right))
        if isinstance(e, A.Ternary):
            return max(self.w(e.then), self.w(e.other))
        raise TypeError(e)

    # -- evaluation --------------------------------------------------------
    def ev(self, e, w) -> int:
        v = self._ev(e, w)
        return v & _mask(w)

    def _ev(self, e, w):
        if isinstance(e, A.Num):
            return e.value
        if isinstance(e, A.Ident):
            return self.values[e.name]
        if isinstance(e, A.Index):
            i = self.ev(e.index, self.w(e.index)) - self.lsb[e.name]
            if i < 0 or i >= self.width[e.name]:
                raise RefTrap("oob-select")
            return (self.values[e.name] >> i) & 1
        if isinstance(e, A.Slice):
            lo = e.lsb - self.lsb[e.name]
            return (self.values[e.name] >> lo) & _mask(e.msb - e.lsb + 1)
        if isinstance(e, A.Concat):
            v = 0
            for p in e.parts:
                pw = self.w(p)
                v = (v << pw) | self.ev(p, pw)
            return v
        if isinstance(e, A.Unary):
            if e.op in ("~", "-", "+"):
                x = self.ev(e.operand, w)
                return ~x if e.op == "~" else -x if e.op == "-" else x
            ow = self.w(e.operand)
            x = self.ev(e.operand, ow)
            if e.op == "!":
                return int(x == 0)
            if e.op == "&":
                return int(x == _mask(ow))
            if e.op == "|":
                return int(x != 0)
            if e.op == "^":
                return bin(x).count("1") & 1
            raise ValueError(e.op)
        if isinstance(e, A.Binary):
            op = e.op
            if op in ("&&", "||"):
                left = self.ev(e.left, self.w(e.left)) != 0
                if op == "&&" and not left:
                    return 0
                if op == "||" and left:
                    return 1
                return int(self.ev(e.right, self.w(e.right)) != 0)
            if op in ("==", "!=", "<", "<=", ">", ">="):
                cw = max(self.w(e.left), self.w(e.right))
                a, b = self.ev(e.left, cw), self.ev(e.right, cw)
                return int({"==": a == b, "!=": a != b, "<": a < b, "<=": a <= b,
                            ">": a > b, ">=": a >= b}[op])
            if op in ("<<", ">>"):
                a = self.ev(e.left, w)
                b = self.ev(e.right, self.w(e.right))
                return a << b if op == "<<" else a >> b
            a, b = self.ev(e.left, w), self.ev(e.right, w)
            if op in ("/", "%"):
                if b == 0:
                    raise RefTrap("div-by-zero")
                return a // b if op == "/" else a % b
            return {"+": a + b, "-": a - b, "*": a * b, "&": a & b, "|": a | b, "^": a ^ b}[op]
        if isinstance(e, A.Ternary):
            c = self.ev(e.cond, self.w(e.cond))
            return self.ev(e.then if c else e.other, w)
        raise TypeError(e)

    # -- assignment ------------------------------------------------------------
    def targets(self, lhs):
        """(name, bit offset, width) pieces of an lvalue, most significant first."""
        if isinstance(lhs, A.Ident):
            return [(lhs.name, 0, self.width[lhs.name])]
        if isinstance(lhs, A.Index):
            i = self.ev(lhs.index, self.w(lhs.index)) - self.lsb[lhs.name]
            if i < 0 or i >= self.width[lhs.name]:
                raise RefTrap("oob-select")
            return [(lhs.name, i, 1)]
        if isinstance(lhs, A.Slice):
            return [(lhs.name, lhs.lsb - self.lsb[lhs.name], lhs.msb - lhs.lsb + 1)]
        if isinstance(lhs, A.Concat):
            out = []
            for p in lhs.parts:
                out += self.targets(p)
            return out
        raise TypeError(lhs)

    def write(self, pieces, value, queue=None):
        for name, off, width in reversed(pieces):
            part = value & _mask(width)
            value >>= width
            if queue is not None:
                queue.append((name, off, width, part))
            else:
                self._store(name, off, width, part)

    def _store(self, name, off, width, part):
        cur = self.values[name]
        self.values[name] = (cur & ~(_mask(width) << off)) | (part << off)

    def do_assign(self, lhs, rhs, queue=None):
        pieces = self.targets(lhs)
        lw = sum(p[2] for p in pieces)
        val = self.ev(rhs, max(lw, self.w(rhs)))
        self.write(pieces, val, queue)

    # -- statements ------------------------------------------------------------
    def run(self, s):
        if isinstance(s, A.Block):
            for x in s.stmts:
                self.run(x)
        elif isinstance(s, A.If):
            if self.ev(s.cond, self.w(s.cond)):
                self.run(s.then)
            elif s.other is not None:
                self.run(s.other)
        elif isinstance(s, A.Case):
            cw = max([self.w(s.subject)] + [self.w(l) for it in s.items for l in it.labels])
            subj = self.ev(s.subject, cw)
            for it in s.items:
                if any(self.ev(l, cw) == subj for l in it.labels):
                    self.run(it.body)
                    return
            if s.default is not None:
                self.run(s.default)
        elif isinstance(s, A.Assign):
            self.do_assign(s.lhs, s.rhs, None if s.blocking else self.nba)
        else:
            raise TypeError(s)

    def settle(self):
        for _ in range(1000):
            before = dict(self.values)
            for a in self.assigns:
                self.do_assign(a.lhs, a.rhs)
            if self.values == before:
                return
        raise RuntimeError("continuous assigns do not settle")

    def cycle(self, frame: dict, reset_active: bool):
        v = self.values
        v[self.clock] = 0
        v[self.reset] = self.reset_active if reset_active else 1 - self.reset_active
        for k, x in frame.items():
            v[k] = x
        self.settle()
        v[self.clock] = 1
        self.settle()
        for p in self.procs:
            self.run(p.body)
        for name, off, width, part in self.nba:
            self._store(name, off, width, part)
        self.nba = []
        self.settle()
        return dict(v)


def reference_run(module, spec, frames, reset_cycles=2):
    """Per-cycle value dicts; stops early with ``("trap", kind, cycle)`` appended."""
    sim = RefSim(module, spec.clock, spec.reset, spec.reset_active_value)
    zero = {p.name: 0 for p in spec.data_inputs}
    out = []
    sched = [(zero, True)] * reset_cycles + [(f, False) for f in frames]
    for k, (f, r) in enumerate(sched):
        try:
            out.append(sim.cycle(f, r))
        except RefTrap as t:
            out.append(("trap", t.kind, k))
            break
    return out
