"""Tokenizer: ``--`` line comments, ``(* *)`` block comments, and contract blocks.

A block opening with ``(*@contract`` is not skipped; it yields ``CONTRACT``
and its closing ``*)`` yields ``ENDCONTRACT``, with ordinary tokens between.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .ast import Span

KEYWORDS = {"node", "returns", "var", "let", "tel", "if", "then", "else", "pre", "and", "or",
            "xor", "not", "true", "false", "bool", "int", "real", "assume", "guarantee"}

SYMBOLS = ["->", "=>", "<>", "<=", ">=", "(", ")", ";", ":", ",", "=", "<", ">", "+", "-", "*", "/"]


class LustreError(Exception):
    def __init__(self, msg: str, span: Span | None = None, expected: tuple = ()):
        self.msg, self.span, self.expected = msg, span, tuple(expected)
        where = f"{span}: " if span is not None else ""
        extra = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{where}{msg}{extra}")


class ParseError(LustreError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str   # IDENT, INT, REAL, KW, SYM, CONTRACT, ENDCONTRACT, EOF
    text: str
    span: Span

    @property
    def value(self):
        if self.kind == "INT":
            return int(self.text)
        if self.kind == "REAL":
            return Fraction(self.text)
        return self.text


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM = re.compile(r"[0-9]+(\.[0-9]+)?")
_CONTRACT = re.compile(r"\(\*@contract\b")


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, col = 0, 1, 1
    in_contract: Span | None = None
    n = len(text)

    def advance(k: int):
        nonlocal pos, line, col
        chunk = text[pos:pos + k]
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += k
        pos += k

    while pos < n:
        c = text[pos]
        here = Span(line, col)
        if c in " \t\r\n":
            advance(1)
            continue
        if text.startswith("--", pos):
            end = text.find("\n", pos)
            advance((end if end >= 0 else n) - pos)
            continue
        m = _CONTRACT.match(text, pos)
        if m:
            if in_contract is not None:
                raise ParseError("nested contract block", here)
            in_contract = here
            toks.append(Token("CONTRACT", m.group(), here))
            advance(m.end() - pos)
            continue
        if in_contract is not None and text.startswith("*)", pos):
            toks.append(Token("ENDCONTRACT", "*)", here))
            in_contract = None
            advance(2)
            continue
        if text.startswith("(*", pos):
            end = text.find("*)", pos + 2)
            if end < 0:
                raise ParseError("unterminated comment", here)
            advance(end + 2 - pos)
            continue
        m = _IDENT.match(text, pos)
        if m:
            word = m.group()
            toks.append(Token("KW" if word in KEYWORDS else "IDENT", word, here))
            advance(len(word))
            continue
        m = _NUM.match(text, pos)
        if m:
            toks.append(Token("REAL" if m.group(1) else "INT", m.group(), here))
            advance(len(m.group()))
            continue
        for s in SYMBOLS:
            if text.startswith(s, pos):
                toks.append(Token("SYM", s, here))
                advance(len(s))
                break
        else:
            raise ParseError(f"unexpected character {c!r}", here)
    if in_contract is not None:
        raise ParseError("unterminated contract block", in_contract)
    toks.append(Token("EOF", "", Span(line, col)))
    return toks
