"""Tokenizer for the Verilog subset."""
from __future__ import annotations

import re
from typing import NamedTuple

from ..errors import ParseError

KEYWORDS = frozenset("""
module endmodule input output wire reg assign always initial begin end if else
case endcase default posedge negedge or assert property disable iff parameter
localparam
""".split())

# Recognised so they fail as "unsupported-construct" instead of "syntax".
UNSUPPORTED_KEYWORDS = frozenset("""
inout function endfunction task endtask generate endgenerate genvar for while
repeat forever integer real realtime time casez casex signed unsigned logic bit
always_ff always_comb always_latch fork join wait specify endspecify primitive
supply0 supply1 tri wand wor defparam force release deassign event interface
package class program sequence endsequence cover assume automatic
""".split())

OPERATORS = [
    "|->", "|=>", "<<<", ">>>", "===", "!==",
    "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "~&", "~|", "~^", "^~", "**", "->", "+:", "-:",
    "(", ")", "[", "]", "{", "}", ";", ",", ":", ".", "@", "#", "=", "+", "-", "*", "/",
    "%", "&", "|", "^", "~", "!", "<", ">", "?",
]
UNSUPPORTED_OPERATORS = frozenset({"|=>", "<<<", ">>>", "===", "!==", "~&", "~|", "~^", "^~", "**", "->", "+:", "-:"})

_BASES = {"b": 2, "o": 8, "d": 10, "h": 16}
_BASED = re.compile(r"(\d[\d_]*)?'([sS]?)([bBoOdDhH])([0-9a-fA-FxXzZ_?]+)")
_DEC = re.compile(r"\d[\d_]*")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_SYS = re.compile(r"\$[A-Za-z_][A-Za-z0-9_]*")


class Token(NamedTuple):
    kind: str  # ID KW NUM SYS OP EOF
    text: str
    line: int
    col: int
    value: object = None


def _number(m, line, col):
    size_txt, signed, base, digits = m.groups()
    if signed:
        raise ParseError("unsupported-construct", "signed literals are not supported", line, col)
    if re.search(r"[xXzZ?]", digits):
        raise ParseError("unsupported-construct", "four-state literal digits are not supported", line, col)
    digits = digits.replace("_", "")
    if not digits:
        raise ParseError("syntax", "empty literal", line, col)
    try:
        value = int(digits, _BASES[base.lower()])
    except ValueError:
        raise ParseError("syntax", f"bad digits for base '{base}: {digits}", line, col) from None
    width = None
    if size_txt is not None:
        width = int(size_txt.replace("_", ""))
        if width < 1:
            raise ParseError("syntax", "literal width must be positive", line, col)
    limit = width if width is not None else 32
    if value >> limit:
        raise ParseError("syntax", f"literal value {value:#x} does not fit in {limit} bits", line, col)
    return (value, width)


def tokenize(text: str) -> list[Token]:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k):
        nonlocal i, line, col
        chunk = text[i:i + k]
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = k - chunk.rfind("\n")
        else:
            col += k
        i += k

    while i < n:
        c = text[i]
        if c in " \t\r\n\f\v":
            advance(1)
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            advance((n if j < 0 else j) - i)
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise ParseError("syntax", "unterminated block comment", line, col, {"*/"})
            advance(j + 2 - i)
            continue
        if c == "`":
            raise ParseError("unsupported-construct", "compiler directives are not supported", line, col)
        if c == '"':
            raise ParseError("unsupported-construct", "string literals are not supported", line, col)
        m = _BASED.match(text, i)
        if m:
            toks.append(Token("NUM", m.group(0), line, col, _number(m, line, col)))
            advance(m.end() - i)
            continue
        m = _DEC.match(text, i)
        if m:
            value = int(m.group(0).replace("_", ""))
            if value >> 32:
                raise ParseError("syntax", f"unsized literal {value} does not fit in 32 bits", line, col)
            toks.append(Token("NUM", m.group(0), line, col, (value, None)))
            advance(m.end() - i)
            continue
        m = _IDENT.match(text, i)
        if m:
            word = m.group(0)
            if word in UNSUPPORTED_KEYWORDS:
                raise ParseError("unsupported-construct", f"'{word}' is not supported", line, col)
            toks.append(Token("KW" if word in KEYWORDS else "ID", word, line, col))
            advance(len(word))
            continue
        if c == "\\":
            raise ParseError("unsupported-construct", "escaped identifiers are not supported", line, col)
        m = _SYS.match(text, i)
        if m:
            if m.group(0) != "$finish":
                raise ParseError("unsupported-construct", f"system task {m.group(0)} is not supported", line, col)
            toks.append(Token("SYS", m.group(0), line, col))
            advance(len(m.group(0)))
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                if op in UNSUPPORTED_OPERATORS:
                    raise ParseError("unsupported-construct", f"operator '{op}' is not supported", line, col)
                toks.append(Token("OP", op, line, col))
                advance(len(op))
                break
        else:
            raise ParseError("syntax", f"unexpected character {c!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks
