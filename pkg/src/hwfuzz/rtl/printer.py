"""Pretty-printer for SourceModule trees.

Output re-parses to a structurally identical tree. Binary, unary and ternary
expressions are fully parenthesised so precedence never has to be recovered.
"""
from __future__ import annotations

from . import ast as A


def format_expr(e) -> str:
    if isinstance(e, A.Num):
        if e.width is None:
            return str(e.value)
        return f"{e.width}'h{e.value:x}"
    if isinstance(e, A.Ident):
        return e.name
    if isinstance(e, A.Index):
        return f"{e.name}[{format_expr(e.index)}]"
    if isinstance(e, A.Slice):
        return f"{e.name}[{e.msb}:{e.lsb}]"
    if isinstance(e, A.Concat):
        return "{" + ", ".join(format_expr(p) for p in e.parts) + "}"
    if isinstance(e, A.Unary):
        return f"({e.op}{format_expr(e.operand)})"
    if isinstance(e, A.Binary):
        return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"
    if isinstance(e, A.Ternary):
        return f"({format_expr(e.cond)} ? {format_expr(e.then)} : {format_expr(e.other)})"
    raise TypeError(f"not an expression: {e!r}")


def _range(msb, lsb):
    return "" if msb == lsb == 0 else f"[{msb}:{lsb}] "


def _stmt(s, ind, out):
    pad = "  " * ind
    if isinstance(s, A.Block):
        out.append(pad + "begin")
        for x in s.stmts:
            _stmt(x, ind + 1, out)
        out.append(pad + "end")
    elif isinstance(s, A.If):
        out.append(f"{pad}if ({format_expr(s.cond)})")
        _stmt(s.then, ind + 1, out)
        if s.other is not None:
            out.append(pad + "else")
            _stmt(s.other, ind + 1, out)
    elif isinstance(s, A.Case):
        out.append(f"{pad}case ({format_expr(s.subject)})")
        for it in s.items:
            out.append(pad + "  " + ", ".join(format_expr(x) for x in it.labels) + ":")
            _stmt(it.body, ind + 2, out)
        if s.default is not None:
            out.append(pad + "  default:")
            _stmt(s.default, ind + 2, out)
        out.append(pad + "endcase")
    elif isinstance(s, A.Assign):
        op = "=" if s.blocking else "<="
        out.append(f"{pad}{format_expr(s.lhs)} {op} {format_expr(s.rhs)};")
    elif isinstance(s, A.Wait):
        out.append(f"{pad}@({s.edge} {s.name});")
    elif isinstance(s, A.Finish):
        out.append(pad + "$finish;")
    else:
        raise TypeError(f"not a statement: {s!r}")


def format_module(m: A.SourceModule) -> str:
    out = []
    if m.ports:
        out.append(f"module {m.name} (")
        for i, p in enumerate(m.ports):
            sep = "," if i < len(m.ports) - 1 else ""
            out.append(f"  {p.direction} {p.kind} {_range(p.msb, p.lsb)}{p.name}{sep}")
        out.append(");")
    else:
        out.append(f"module {m.name};")
    for it in m.items:
        if isinstance(it, A.NetDecl):
            init = "" if it.init is None else f" = {format_expr(it.init)}"
            out.append(f"  {it.kind} {_range(it.msb, it.lsb)}{it.name}{init};")
        elif isinstance(it, A.ParamDecl):
            kw = "localparam" if it.local else "parameter"
            out.append(f"  {kw} {it.name} = {format_expr(it.value)};")
        elif isinstance(it, A.ContAssign):
            out.append(f"  assign {format_expr(it.lhs)} = {format_expr(it.rhs)};")
        elif isinstance(it, A.Always):
            sens = " or ".join(f"{e} {n}" for e, n in it.sensitivity)
            out.append(f"  always @({sens})")
            _stmt(it.body, 2, out)
        elif isinstance(it, A.ClockGen):
            out.append(f"  always #{it.half_period} {it.name} = ~{it.name};")
        elif isinstance(it, A.Initial):
            out.append("  initial")
            _stmt(it.body, 2, out)
        elif isinstance(it, A.Instance):
            conns = ", ".join(f".{p}({'' if e is None else format_expr(e)})" for p, e in it.connections)
            out.append(f"  {it.module} {it.name}({conns});")
        elif isinstance(it, A.AssertionDecl):
            label = f"{it.label}: " if it.label else ""
            dis = "" if it.disable is None else f" disable iff ({format_expr(it.disable)})"
            out.append(f"  {label}assert property (@({it.clock_edge} {it.clock}){dis} "
                       f"{format_expr(it.antecedent)} |-> {format_expr(it.consequent)});")
        else:
            raise TypeError(f"not a module item: {it!r}")
    out.append("endmodule")
    return "\n".join(out) + "\n"


def format_source(modules) -> str:
    return "\n".join(format_module(m) for m in modules)
