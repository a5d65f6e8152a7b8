"""Recursive-descent parser for the supported Verilog subset.

Besides the synthesizable design subset this accepts a handful of testbench
constructs (``initial`` blocks with ``@(edge sig);`` waits and ``$finish``,
and the ``always #N clk = ~clk;`` clock generator) so that generated replay
testbenches can be parsed and simulated in-process.
"""
from __future__ import annotations

from ..errors import ParseError
from . import ast as A
from .lexer import Token, tokenize

# binary precedence, lowest first
_LEVELS = [
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
]
_UNARY = ("~", "!", "-", "&", "|", "^", "+")


def parse(source_text: str) -> list[A.SourceModule]:
    """Parse ``source_text`` into a list of modules or raise :class:`ParseError`."""
    modules = _Parser(tokenize(source_text)).source()
    seen = set()
    for m in modules:
        if m.name in seen:
            line, col = m.span or (None, None)
            raise ParseError("duplicate-name", f"module '{m.name}' defined twice", line, col)
        seen.add(m.name)
        check_module(m)
    return modules


def parse_files(paths) -> list[A.SourceModule]:
    text = []
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            text.append(fh.read())
    return parse("\n".join(text))


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0
        self.params: dict[str, int] = {}

    # -- token helpers -------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("OP", "KW", "SYS") and t.text in texts

    def next(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def fail(self, expected, what=None):
        t = self.tok
        got = "end of input" if t.kind == "EOF" else repr(t.text)
        exp = sorted(expected)
        msg = what or f"expected {' or '.join(exp)}, got {got}"
        raise ParseError("syntax", msg, t.line, t.col, exp)

    def unsupported(self, what, t=None):
        t = t or self.tok
        raise ParseError("unsupported-construct", f"{what} is not supported", t.line, t.col)

    def expect(self, *texts) -> Token:
        if self.at(*texts):
            return self.next()
        self.fail(texts)

    def ident(self) -> Token:
        if self.tok.kind == "ID":
            return self.next()
        self.fail(["identifier"])

    @staticmethod
    def span(t: Token):
        return (t.line, t.col)

    # -- structure -----------------------------------------------------------
    def source(self):
        mods = []
        while self.tok.kind != "EOF":
            if not self.at("module"):
                self.fail(["module"])
            mods.append(self.module())
        return mods

    def module(self) -> A.SourceModule:
        start = self.expect("module")
        name = self.ident().text
        self.params = {}
        if self.at("#"):
            self.unsupported("module parameter lists")
        ports = []
        if self.at("("):
            self.next()
            if not self.at(")"):
                ports = self.port_list()
            self.expect(")")
        self.expect(";")
        items = []
        while not self.at("endmodule"):
            if self.tok.kind == "EOF":
                self.fail(["endmodule"])
            items.extend(self.item())
        self.next()
        return A.SourceModule(name, tuple(ports), tuple(items), span=self.span(start))

    def port_list(self):
        ports = []
        direction = kind = None
        rng = (0, 0)
        while True:
            t = self.tok
            if self.at("input", "output"):
                direction = self.next().text
                kind = "wire"
                if self.at("wire", "reg"):
                    kind = self.next().text
                if direction == "input" and kind == "reg":
                    raise ParseError("syntax", "input ports cannot be reg", t.line, t.col)
                rng = self.opt_range()
            elif direction is None:
                if self.tok.kind == "ID":
                    self.unsupported("non-ANSI port lists")
                self.fail(["input", "output"])
            name = self.ident()
            ports.append(A.PortDecl(name.text, direction, kind, rng[0], rng[1], span=self.span(name)))
            if self.at(","):
                self.next()
                continue
            return ports

    def opt_range(self):
        if not self.at("["):
            return (0, 0)
        t = self.next()
        msb = self.const_int(self.expr())
        self.expect(":")
        lsb = self.const_int(self.expr())
        self.expect("]")
        if msb < lsb:
            self.unsupported("ascending bit ranges", t)
        if lsb < 0:
            raise ParseError("syntax", "negative range bound", t.line, t.col)
        return (msb, lsb)

    def const_int(self, e) -> int:
        v = const_value(e, self.params)
        if v is None:
            line, col = e.span or (None, None)
            raise ParseError("syntax", "expected a constant expression", line, col, {"constant"})
        return v

    def item(self):
        t = self.tok
        if self.at("wire", "reg"):
            return self.net_decl()
        if self.at("parameter", "localparam"):
            return self.param_decl()
        if self.at("input", "output"):
            self.unsupported("port declarations inside the module body")
        if self.at("assign"):
            return self.cont_assign()
        if self.at("always"):
            return [self.always()]
        if self.at("initial"):
            self.next()
            return [A.Initial(self.statement(testbench=True), span=self.span(t))]
        if self.at("assert"):
            return [self.assertion(None, t)]
        if t.kind == "ID":
            if self.peek().kind == "OP" and self.peek().text == ":":
                label = self.next().text
                self.next()
                if not self.at("assert"):
                    self.fail(["assert"])
                return [self.assertion(label, t)]
            return [self.instance()]
        self.fail(["wire", "reg", "assign", "always", "initial", "assert", "localparam",
                   "parameter", "endmodule", "module instance"])

    def net_decl(self):
        kind = self.next().text
        msb, lsb = self.opt_range()
        out = []
        while True:
            name = self.ident()
            init = None
            if self.at("="):
                self.next()
                init = self.expr()
            if self.at("["):
                self.unsupported("memories/arrays")
            out.append(A.NetDecl(name.text, kind, msb, lsb, init, span=self.span(name)))
            if self.at(","):
                self.next()
                continue
            self.expect(";")
            return out

    def param_decl(self):
        local = self.next().text == "localparam"
        if self.at("["):
            self.opt_range()  # width annotation only; value keeps its own width
        out = []
        while True:
            name = self.ident()
            self.expect("=")
            value = self.expr()
            v = const_value(value, self.params)
            if v is None:
                line, col = value.span or (None, None)
                raise ParseError("syntax", "parameter value must be constant", line, col, {"constant"})
            self.params[name.text] = v
            out.append(A.ParamDecl(name.text, value, local, span=self.span(name)))
            if self.at(","):
                self.next()
                continue
            self.expect(";")
            return out

    def cont_assign(self):
        self.next()
        out = []
        while True:
            t = self.tok
            lhs = self.lvalue()
            self.expect("=")
            out.append(A.ContAssign(lhs, self.expr(), span=self.span(t)))
            if self.at(","):
                self.next()
                continue
            self.expect(";")
            return out

    def always(self):
        start = self.next()
        if self.at("#"):
            self.next()
            if self.tok.kind != "NUM":
                self.fail(["delay"])
            half = self.next().value[0]
            name = self.ident().text
            self.expect("=")
            self.expect("~")
            other = self.ident().text
            if other != name:
                self.unsupported("delayed assignments other than a clock toggle", start)
            self.expect(";")
            return A.ClockGen(name, half, span=self.span(start))
        self.expect("@")
        if self.at("*"):
            self.unsupported("combinational always blocks", start)
        self.expect("(")
        if self.at("*"):
            self.unsupported("combinational always blocks", start)
        sens = []
        while True:
            if not self.at("posedge", "negedge"):
                if self.tok.kind == "ID":
                    self.unsupported("level-sensitive event lists")
                self.fail(["posedge", "negedge"])
            edge = self.next().text
            sens.append((edge, self.ident().text))
            if self.at("or", ","):
                self.next()
                continue
            break
        self.expect(")")
        return A.Always(tuple(sens), self.statement(), span=self.span(start))

    def instance(self):
        mod = self.next()
        if self.at("#"):
            self.unsupported("parameter overrides")
        name = self.ident()
        self.expect("(")
        conns = []
        if not self.at(")"):
            while True:
                if not self.at("."):
                    if self.at(")"):
                        break
                    self.unsupported("positional port connections")
                self.next()
                port = self.ident().text
                self.expect("(")
                e = None if self.at(")") else self.expr()
                self.expect(")")
                conns.append((port, e))
                if self.at(","):
                    self.next()
                    continue
                break
        self.expect(")")
        self.expect(";")
        return A.Instance(mod.text, name.text, tuple(conns), span=self.span(mod))

    def assertion(self, label, start):
        self.expect("assert")
        self.expect("property")
        self.expect("(")
        self.expect("@")
        self.expect("(")
        if not self.at("posedge", "negedge"):
            self.fail(["posedge", "negedge"])
        edge = self.next().text
        clock = self.ident().text
        self.expect(")")
        disable = None
        if self.at("disable"):
            self.next()
            self.expect("iff")
            self.expect("(")
            disable = self.expr()
            self.expect(")")
        ante = self.expr()
        self.expect("|->")
        cons = self.expr()
        self.expect(")")
        self.expect(";")
        return A.AssertionDecl(edge, clock, ante, cons, disable, label, span=self.span(start))

    # -- statements ----------------------------------------------------------
    def statement(self, testbench=False):
        t = self.tok
        if self.at("begin"):
            self.next()
            if self.at(":"):
                self.unsupported("named blocks")
            body = []
            while not self.at("end"):
                if self.tok.kind == "EOF":
                    self.fail(["end"])
                body.append(self.statement(testbench))
            self.next()
            return A.Block(tuple(body), span=self.span(t))
        if self.at("if"):
            self.next()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.statement(testbench)
            other = None
            if self.at("else"):
                self.next()
                other = self.statement(testbench)
            return A.If(cond, then, other, span=self.span(t))
        if self.at("case"):
            return self.case(testbench)
        if self.at(";"):
            self.next()
            return A.Block((), span=self.span(t))
        if testbench and self.at("@"):
            self.next()
            self.expect("(")
            if not self.at("posedge", "negedge"):
                self.fail(["posedge", "negedge"])
            edge = self.next().text
            name = self.ident().text
            self.expect(")")
            self.expect(";")
            return A.Wait(edge, name, span=self.span(t))
        if testbench and self.at("$finish"):
            self.next()
            self.expect(";")
            return A.Finish(span=self.span(t))
        if self.at("#", "@"):
            self.unsupported("timing controls outside testbench initial blocks")
        if self.at("$finish"):
            self.unsupported("$finish outside initial blocks")
        if t.kind in ("ID",) or self.at("{"):
            lhs = self.lvalue()
            if not self.at("=", "<="):
                self.fail(["=", "<="])
            blocking = self.next().text == "="
            if self.at("#", "@"):
                self.unsupported("intra-assignment delays")
            rhs = self.expr()
            self.expect(";")
            return A.Assign(lhs, rhs, blocking, span=self.span(t))
        self.fail(["begin", "if", "case", "identifier", ";"])

    def case(self, testbench):
        t = self.next()
        self.expect("(")
        subject = self.expr()
        self.expect(")")
        items = []
        default = None
        while not self.at("endcase"):
            if self.tok.kind == "EOF":
                self.fail(["endcase"])
            it = self.tok
            if self.at("default"):
                self.next()
                if self.at(":"):
                    self.next()
                if default is not None:
                    raise ParseError("syntax", "duplicate default item", it.line, it.col)
                default = self.statement(testbench)
                continue
            labels = [self.expr()]
            while self.at(","):
                self.next()
                labels.append(self.expr())
            self.expect(":")
            items.append(A.CaseItem(tuple(labels), self.statement(testbench), span=self.span(it)))
        self.next()
        if not items and default is None:
            raise ParseError("syntax", "case without items", t.line, t.col, {"case item"})
        return A.Case(subject, tuple(items), default, span=self.span(t))

    def lvalue(self):
        t = self.tok
        if self.at("{"):
            self.next()
            parts = [self.lvalue()]
            while self.at(","):
                self.next()
                parts.append(self.lvalue())
            self.expect("}")
            return A.Concat(tuple(parts), span=self.span(t))
        name = self.ident()
        return self.selects(name)

    def selects(self, name: Token):
        if not self.at("["):
            return A.Ident(name.text, span=self.span(name))
        self.next()
        first = self.expr()
        if self.at(":"):
            self.next()
            second = self.expr()
            self.expect("]")
            msb, lsb = self.const_int(first), self.const_int(second)
            if msb < lsb:
                self.unsupported("reversed part selects", name)
            e = A.Slice(name.text, msb, lsb, span=self.span(name))
        else:
            self.expect("]")
            e = A.Index(name.text, first, span=self.span(name))
        if self.at("["):
            self.unsupported("multi-dimensional selects")
        return e

    # -- expressions ---------------------------------------------------------
    def expr(self):
        t = self.tok
        cond = self.binary(0)
        if self.at("?"):
            self.next()
            then = self.expr()
            self.expect(":")
            other = self.expr()
            return A.Ternary(cond, then, other, span=self.span(t))
        return cond

    def binary(self, level):
        if level == len(_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        while self.tok.kind == "OP" and self.tok.text in _LEVELS[level]:
            op = self.next()
            right = self.binary(level + 1)
            left = A.Binary(op.text, left, right, span=left.span)
        return left

    def unary(self):
        t = self.tok
        if t.kind == "OP" and t.text in _UNARY:
            self.next()
            operand = self.unary()
            if t.text == "+":
                return operand
            return A.Unary(t.text, operand, span=self.span(t))
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "NUM":
            self.next()
            value, width = t.value
            return A.Num(value, width, span=self.span(t))
        if t.kind == "ID":
            self.next()
            if self.at("("):
                self.unsupported("function calls", t)
            return self.selects(t)
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("{"):
            self.next()
            parts = [self.expr()]
            if self.at("{"):
                self.unsupported("replication")
            while self.at(","):
                self.next()
                parts.append(self.expr())
            if self.at("{"):
                self.unsupported("replication")
            self.expect("}")
            return A.Concat(tuple(parts), span=self.span(t))
        if t.kind == "SYS":
            self.unsupported("system functions")
        self.fail(["expression"])


def const_value(e, params) -> int | None:
    """Fold a constant expression to a Python int, or return None."""
    if isinstance(e, A.Num):
        return e.value
    if isinstance(e, A.Ident):
        return params.get(e.name)
    if isinstance(e, A.Unary):
        v = const_value(e.operand, params)
        if v is None:
            return None
        return {"-": lambda: -v, "!": lambda: int(not v), "~": lambda: ~v}.get(e.op, lambda: None)()
    if isinstance(e, A.Binary):
        a, b = const_value(e.left, params), const_value(e.right, params)
        if a is None or b is None:
            return None
        ops = {
            "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
            "/": lambda: a // b if b else None, "%": lambda: a % b if b else None,
            "<<": lambda: a << b, ">>": lambda: a >> b,
            "&": lambda: a & b, "|": lambda: a | b, "^": lambda: a ^ b,
            "==": lambda: int(a == b), "!=": lambda: int(a != b),
            "<": lambda: int(a < b), "<=": lambda: int(a <= b),
            ">": lambda: int(a > b), ">=": lambda: int(a >= b),
            "&&": lambda: int(bool(a and b)), "||": lambda: int(bool(a or b)),
        }
        return ops[e.op]()
    if isinstance(e, A.Ternary):
        c = const_value(e.cond, params)
        if c is None:
            return None
        return const_value(e.then if c else e.other, params)
    return None


# -- semantic checks ---------------------------------------------------------

def _err(category, msg, node):
    line, col = node.span or (None, None)
    raise ParseError(category, msg, line, col)


def check_module(m: A.SourceModule) -> None:
    """Name-level checks: uniqueness and resolution within the module scope."""
    signals: dict[str, object] = {}
    params: set[str] = set()
    param_values: dict[str, int] = {}
    names: set[str] = set()

    def declare(name, node):
        if name in names:
            _err("duplicate-name", f"'{name}' declared twice in module '{m.name}'", node)
        names.add(name)

    for p in m.ports:
        declare(p.name, p)
        signals[p.name] = p
    for it in m.items:
        if isinstance(it, A.NetDecl):
            declare(it.name, it)
            signals[it.name] = it
        elif isinstance(it, A.ParamDecl):
            declare(it.name, it)
            params.add(it.name)
            param_values[it.name] = const_value(it.value, param_values)
        elif isinstance(it, A.Instance):
            declare(it.name, it)

    def resolve(e, where):
        for sub in A.walk_expr(e):
            if isinstance(sub, A.Ident):
                if sub.name not in signals and sub.name not in params:
                    _err("unresolved-identifier", f"'{sub.name}' is not declared in '{m.name}'", sub)
            elif isinstance(sub, (A.Index, A.Slice)):
                decl = signals.get(sub.name)
                if decl is None:
                    cat = "syntax" if sub.name in params else "unresolved-identifier"
                    _err(cat, f"cannot select from '{sub.name}' in '{m.name}'", sub)
                lo, hi = decl.lsb, decl.msb
                if isinstance(sub, A.Slice):
                    if sub.lsb < lo or sub.msb > hi:
                        _err("syntax", f"part select [{sub.msb}:{sub.lsb}] out of range for '{sub.name}'", sub)
                elif isinstance(sub.index, A.Num) and not lo <= sub.index.value <= hi:
                    _err("syntax", f"bit select [{sub.index.value}] out of range for '{sub.name}'", sub)

    def resolve_signal(name, node):
        if name not in signals:
            _err("unresolved-identifier", f"'{name}' is not a signal of '{m.name}'", node)

    def check_lvalue(e):
        if isinstance(e, A.Concat):
            for p in e.parts:
                check_lvalue(p)
            return
        if e.name in params:
            _err("syntax", f"cannot assign to parameter '{e.name}'", e)
        resolve(e, "lvalue")

    def check_stmt(s):
        for sub in A.walk_stmt(s):
            if isinstance(sub, A.Assign):
                check_lvalue(sub.lhs)
                resolve(sub.rhs, "rhs")
            elif isinstance(sub, A.If):
                resolve(sub.cond, "cond")
            elif isinstance(sub, A.Case):
                resolve(sub.subject, "case")
                for item in sub.items:
                    for lab in item.labels:
                        resolve(lab, "label")
            elif isinstance(sub, A.Wait):
                resolve_signal(sub.name, sub)

    for it in m.items:
        if isinstance(it, A.NetDecl) and it.init is not None:
            resolve(it.init, "init")
            if it.kind == "reg" and const_value(it.init, param_values) is None:
                _err("syntax", f"initializer of reg '{it.name}' must be constant", it)
        elif isinstance(it, A.ContAssign):
            check_lvalue(it.lhs)
            resolve(it.rhs, "rhs")
        elif isinstance(it, A.Always):
            for _, name in it.sensitivity:
                resolve_signal(name, it)
            check_stmt(it.body)
        elif isinstance(it, A.ClockGen):
            resolve_signal(it.name, it)
        elif isinstance(it, A.Initial):
            check_stmt(it.body)
        elif isinstance(it, A.Instance):
            ports = set()
            for port, e in it.connections:
                if port in ports:
                    _err("duplicate-name", f"port '{port}' connected twice on '{it.name}'", it)
                ports.add(port)
                if e is not None:
                    resolve(e, "connection")
        elif isinstance(it, A.AssertionDecl):
            resolve_signal(it.clock, it)
            for e in (it.disable, it.antecedent, it.consequent):
                if e is not None:
                    resolve(e, "assertion")
