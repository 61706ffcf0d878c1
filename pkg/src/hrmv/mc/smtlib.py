"""SMT-LIB 2.6 scripts for unrolled transition systems, and model parsing.

Frame ``i`` of variable ``x`` is the constant ``|x@i|``; a primed state
``s'`` used at frame ``i`` is ``|s@(i+1)|``.  Scripts are deterministic:
declarations are ordered by frame then name, assertions by frame then task
order.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from ..expr import BOOL, INT, REAL, UNIT, Expr, Sort, Value, VarId, conj, smt_value, to_smt, var
from .ts import TransitionSystem

QUERIES = ("bmc", "base", "step", "lemma")


def symbol(v: VarId, i: int) -> str:
    return f"|{v.name}@{i}|"


def at(e: Expr, i: int) -> str:
    def name(v: VarId) -> str:
        return symbol(v.unprimed, i + 1) if v.is_primed else symbol(v, i)
    return to_smt(e, name)


def emit_smt(ts: TransitionSystem, k: int, query: str, lemmas: Iterable[VarId] = ()) -> str:
    """Script for one query over frames ``0..k``.

    ``bmc``/``base``: initial states, ``k+1`` transitions and assumptions, and
    the property violated at frame ``k``.  ``step``: no initial constraint,
    the property holds at frames ``0..k-1`` and fails at ``k``; ``lemmas``
    (boolean states) are asserted at every frame.  ``lemma``: one transition
    from a frame where all ``lemmas`` hold to one where some fails.
    """
    if query not in QUERIES:
        raise ValueError(f"unknown query {query!r}")
    lemmas = tuple(lemmas)
    if query == "lemma":
        k = 0
    out = [f"; {ts.name} {query} k={k}", "(set-option :produce-models true)", f"(set-logic {ts.logic})"]
    for i in range(k + 1):
        for v in ts.frame_vars:
            out.append(f"(declare-fun {symbol(v, i)} () {v.sort.smt})")
    for v in ts.states:
        out.append(f"(declare-fun {symbol(v, k + 1)} () {v.sort.smt})")
    if query in ("bmc", "base"):
        for s, val in ts.init:
            out.append(f"(assert (= {symbol(s, 0)} {smt_value(val, s.sort)}))")
    for i in range(k + 1):
        for _, t in ts.trans:
            out.append(f"(assert {at(t, i)})")
        for _, a in ts.assumes:
            out.append(f"(assert {at(a, i)})")
    prop = ts.prop
    if query == "step":
        for i in range(k + 1):
            for v in lemmas:
                out.append(f"(assert {symbol(v, i)})")
        for i in range(k):
            out.append(f"(assert {at(prop, i)})")
    if query == "lemma":
        for v in lemmas:
            out.append(f"(assert {symbol(v, 0)})")
        out.append(f"(assert (not {at(conj(var(v) for v in lemmas), 1)}))")
    else:
        out.append(f"(assert (not {at(prop, k)}))")
    out.append("(check-sat)")
    return "\n".join(out) + "\n"


# -- models ------------------------------------------------------------------------

class ModelError(Exception):
    pass


def _tokens(text: str) -> list[str]:
    toks, i, n = [], 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            toks.append(c)
            i += 1
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise ModelError("unterminated quoted symbol")
            toks.append(text[i:j + 1])
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n and not (text[j] == '"' and (j + 1 >= n or text[j + 1] != '"')):
                j += 2 if text[j] == '"' else 1
            toks.append(text[i:j + 1])
            i = j + 1
        elif c == ";":
            j = text.find("\n", i)
            i = n if j < 0 else j
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            toks.append(text[i:j])
            i = j
    return toks


def parse_sexprs(text: str) -> list:
    toks = _tokens(text)
    pos = 0

    def one():
        nonlocal pos
        if pos >= len(toks):
            raise ModelError("unexpected end of model")
        t = toks[pos]
        pos += 1
        if t == "(":
            items = []
            while pos < len(toks) and toks[pos] != ")":
                items.append(one())
            if pos >= len(toks):
                raise ModelError("unbalanced parentheses in model")
            pos += 1
            return items
        if t == ")":
            raise ModelError("unexpected ')' in model")
        return t

    out = []
    while pos < len(toks):
        out.append(one())
    return out


def _value(x, sort: str) -> Value:
    if isinstance(x, str):
        if x in ("true", "false"):
            return x == "true"
        return Fraction(x)
    if x and x[0] == "-" and len(x) == 2:
        return -_value(x[1], sort)
    if x and x[0] == "/" and len(x) == 3:
        return Fraction(_value(x[1], sort)) / Fraction(_value(x[2], sort))
    if x and x[0] == "to_real" and len(x) == 2:
        return _value(x[1], sort)
    raise ModelError(f"unsupported value term {x!r}")


def parse_model(text: str) -> dict[str, Value]:
    """Map from symbol name (without ``|``) to value for every ``define-fun``."""
    out: dict[str, Value] = {}

    def visit(node):
        if isinstance(node, list):
            if len(node) == 5 and node[0] == "define-fun" and node[2] == []:
                name = node[1].strip("|")
                sort = node[3]
                v = _value(node[4], sort)
                if sort == "Int":
                    v = int(v)
                elif sort == "Real":
                    v = Fraction(v)
                out[name] = v
                return
            for x in node:
                visit(x)

    for s in parse_sexprs(text):
        if isinstance(s, list) and s and s[0] == "error":
            continue
        visit(s)
    return out


def frames_from_model(ts: TransitionSystem, model: dict, k: int) -> list[dict]:
    """Values for frames ``0..k`` (all frame variables) and frame ``k+1`` (states)."""
    defaults = {BOOL: False, UNIT: True, INT: 0, REAL: Fraction(0)}
    frames = []
    for i in range(k + 1):
        frames.append({v: _coerce(model.get(f"{v.name}@{i}", defaults[v.sort]), v.sort) for v in ts.frame_vars})
    frames.append({v: _coerce(model.get(f"{v.name}@{k + 1}", defaults[v.sort]), v.sort) for v in ts.states})
    return frames


def _coerce(x: Value, sort: Sort) -> Value:
    if sort is BOOL:
        return bool(x)
    if sort is INT:
        return int(x)
    if sort is REAL:
        return Fraction(x)
    return ()
