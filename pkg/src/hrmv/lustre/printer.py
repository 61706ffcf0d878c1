"""Deterministic pretty printer; its output parses back to an equal tree."""

from __future__ import annotations

from fractions import Fraction
from itertools import groupby

from ..expr import decimal_text
from .ast import Binary, Call, Ident, Ite, Lit, NodeDecl, Program, Unary

_PREC = {"->": 1, "=>": 2, "or": 3, "xor": 3, "and": 4,
         "=": 5, "<>": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
         "+": 7, "-": 7, "*": 8, "/": 8}
_RIGHT = {"->", "=>"}
_NOT, _PREFIX = 6, 9


def _lit(e: Lit) -> str:
    if e.sort == "bool":
        return "true" if e.value else "false"
    if e.sort == "int":
        return str(e.value)
    q = Fraction(e.value)
    text = decimal_text(abs(q)) or f"({abs(q.numerator)}.0 / {q.denominator}.0)"
    return text if q >= 0 else f"(-{text})"


def expr_text(e, ctx: int = 0) -> str:
    if isinstance(e, Lit):
        s = _lit(e)
        return f"({s})" if s.startswith("-") and ctx > 0 else s
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Call):
        return f"{e.node}({', '.join(expr_text(a) for a in e.args)})"
    if isinstance(e, Ite):
        s = f"if {expr_text(e.cond)} then {expr_text(e.then)} else {expr_text(e.other)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(e, Unary):
        if e.op == "not":
            s, p = f"not {expr_text(e.arg, _NOT)}", _NOT
        else:
            inner = expr_text(e.arg, _PREFIX)
            if inner.startswith("-"):
                inner = f"({inner})"
            s, p = (f"-{inner}" if e.op == "-" else f"pre {inner}"), _PREFIX
        return f"({s})" if p < ctx else s
    p = _PREC[e.op]
    if e.op in _RIGHT:
        lp, rp = p + 1, p
    elif p == 5:
        lp = rp = p + 1
    else:
        lp, rp = p, p + 1
    s = f"{expr_text(e.left, lp)} {e.op} {expr_text(e.right, rp)}"
    return f"({s})" if p < ctx else s


def _params(ps, sep: str) -> str:
    parts = []
    for ty, grp in groupby(ps, key=lambda p: p.type):
        parts.append(f"{', '.join(p.name for p in grp)} : {ty}")
    return sep.join(parts)


def node_text(n: NodeDecl) -> str:
    lines = [f"node {n.name} ({_params(n.inputs, '; ')})", f"returns ({_params(n.outputs, '; ')});"]
    if n.contract is not None:
        lines.append("(*@contract")
        lines.extend(f"  assume {expr_text(a)};" for a in n.contract.assumes)
        lines.extend(f"  guarantee {expr_text(g)};" for g in n.contract.guarantees)
        lines.append("*)")
    if n.locals:
        lines.append(f"var {_params(n.locals, '; ')};")
    lines.append("let")
    for eq in n.equations:
        lines.append(f"  {', '.join(eq.lhs)} = {expr_text(eq.rhs)};")
    lines.append("tel")
    return "\n".join(lines) + "\n"


def pretty_print(p: Program) -> str:
    return "\n".join(node_text(n) for n in p.nodes)
