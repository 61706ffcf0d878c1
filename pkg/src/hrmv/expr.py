"""Typed expressions over module variables.

Values are exact: ``bool`` for bool, ``int`` for int, :class:`fractions.Fraction`
for real and ``()`` for unit.  The same trees are evaluated by the finite-domain
oracle and rendered to SMT-LIB by the model checker.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union


class Sort(enum.Enum):
    UNIT = "unit"
    BOOL = "bool"
    INT = "int"
    REAL = "real"

    def __str__(self) -> str:
        return self.value

    @property
    def smt(self) -> str:
        return {"unit": "Bool", "bool": "Bool", "int": "Int", "real": "Real"}[self.value]


UNIT, BOOL, INT, REAL = Sort.UNIT, Sort.BOOL, Sort.INT, Sort.REAL

Value = Union[bool, int, Fraction, tuple]


@dataclass(frozen=True, order=True)
class VarId:
    name: str
    sort: Sort = BOOL

    def __str__(self) -> str:
        return self.name

    @property
    def primed(self) -> VarId:
        return VarId(self.name + "'", self.sort)

    @property
    def is_primed(self) -> bool:
        return self.name.endswith("'")

    @property
    def unprimed(self) -> VarId:
        return VarId(self.name[:-1], self.sort) if self.is_primed else self


class ExprError(Exception):
    pass


@dataclass(frozen=True)
class Var:
    var: VarId

    @property
    def sort(self) -> Sort:
        return self.var.sort


@dataclass(frozen=True)
class Const:
    value: Value
    sort: Sort


@dataclass(frozen=True)
class App:
    op: str
    args: tuple
    sort: Sort


Expr = Union[Var, Const, App]

TRUE = Const(True, BOOL)
FALSE = Const(False, BOOL)

BOOL_OPS = {"not", "and", "or", "xor", "=>"}
CMP_OPS = {"=", "<>", "<", "<=", ">", ">="}
ARITH_OPS = {"+", "-", "*", "/", "neg"}


def const(value: Value, sort: Sort | None = None) -> Const:
    if sort is None:
        if isinstance(value, bool):
            sort = BOOL
        elif isinstance(value, int):
            sort = INT
        elif isinstance(value, Fraction):
            sort = REAL
        else:
            sort = UNIT
    return Const(coerce(value, sort), sort)


def coerce(value, sort: Sort) -> Value:
    if sort is BOOL:
        return bool(value)
    if sort is INT:
        return int(value)
    if sort is REAL:
        return Fraction(value)
    return ()


def var(v: VarId) -> Var:
    return Var(v)


def app(op: str, *args: Expr) -> App:
    """Build an application, inferring and checking the result sort."""
    sorts = [a.sort for a in args]
    if op == "ite":
        c, t, e = sorts
        if c is not BOOL or t is not e:
            raise ExprError(f"ill-sorted ite({c}, {t}, {e})")
        return App(op, tuple(args), t)
    if op in BOOL_OPS:
        if any(s is not BOOL for s in sorts):
            raise ExprError(f"'{op}' expects bool operands, got {', '.join(map(str, sorts))}")
        return App(op, tuple(args), BOOL)
    if op in CMP_OPS:
        a, b = sorts
        if a is not b or (op not in ("=", "<>") and a not in (INT, REAL)):
            raise ExprError(f"'{op}' cannot compare {a} with {b}")
        return App(op, tuple(args), BOOL)
    if op in ARITH_OPS:
        if any(s not in (INT, REAL) for s in sorts) or len(set(sorts)) != 1:
            raise ExprError(f"'{op}' expects numeric operands of one sort, got {', '.join(map(str, sorts))}")
        if op == "/":
            if sorts[0] is not REAL:
                raise ExprError("division is only defined on reals")
            d = args[1]
            if not is_constant(d) or evaluate(d, {}) == 0:
                raise ExprError("division is only allowed by a nonzero literal")
        return App(op, tuple(args), sorts[0])
    raise ExprError(f"unknown operator '{op}'")


def conj(items: Iterable[Expr]) -> Expr:
    items = [e for e in items if e != TRUE]
    if not items:
        return TRUE
    out = items[0]
    for e in items[1:]:
        out = app("and", out, e)
    return out


def free_vars(e: Expr) -> frozenset[VarId]:
    if isinstance(e, Var):
        return frozenset([e.var])
    if isinstance(e, Const):
        return frozenset()
    out: set[VarId] = set()
    for a in e.args:
        out |= free_vars(a)
    return frozenset(out)


def is_constant(e: Expr) -> bool:
    return not free_vars(e)


def is_linear(e: Expr) -> bool:
    if isinstance(e, App):
        if e.op == "*" and not (is_constant(e.args[0]) or is_constant(e.args[1])):
            return False
        return all(is_linear(a) for a in e.args)
    return True


def substitute(e: Expr, mapping: Mapping[VarId, Expr]) -> Expr:
    if isinstance(e, Var):
        return mapping.get(e.var, e)
    if isinstance(e, Const):
        return e
    return App(e.op, tuple(substitute(a, mapping) for a in e.args), e.sort)


def rename(e: Expr, fn: Callable[[VarId], VarId]) -> Expr:
    if isinstance(e, Var):
        return Var(fn(e.var))
    if isinstance(e, Const):
        return e
    return App(e.op, tuple(rename(a, fn) for a in e.args), e.sort)


def evaluate(e: Expr, env: Mapping[VarId, Value]) -> Value:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.var]
        except KeyError:
            raise ExprError(f"no value for {e.var.name}") from None
    op = e.op
    if op == "ite":
        return evaluate(e.args[1] if evaluate(e.args[0], env) else e.args[2], env)
    if op == "and":
        return all(evaluate(a, env) for a in e.args)
    if op == "or":
        return any(evaluate(a, env) for a in e.args)
    if op == "=>":
        return (not evaluate(e.args[0], env)) or bool(evaluate(e.args[1], env))
    vals = [evaluate(a, env) for a in e.args]
    if op == "not":
        return not vals[0]
    if op == "neg":
        return -vals[0]
    if op == "xor":
        return vals[0] != vals[1]
    a, b = vals
    if op == "=":
        return a == b
    if op == "<>":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return Fraction(a) / Fraction(b)
    raise ExprError(f"unknown operator '{op}'")


# -- rendering ---------------------------------------------------------------

def format_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if v == ():
        return "()"
    return str(v)


def parse_value(text: str, sort: Sort) -> Value:
    text = text.strip()
    if sort is BOOL:
        if text not in ("true", "false"):
            raise ValueError(f"not a bool: {text!r}")
        return text == "true"
    if sort is INT:
        return int(text)
    if sort is REAL:
        return Fraction(text)
    return ()


def decimal_text(q: Fraction) -> str | None:
    """Exact decimal text for q if its denominator has only factors 2 and 5."""
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return None
    places = max(twos, fives, 1)
    scaled = abs(q.numerator) * 10**places // q.denominator
    digits = str(scaled).rjust(places + 1, "0")
    return f"{digits[:-places]}.{digits[-places:]}"


def smt_value(v: Value, sort: Sort) -> str:
    if sort in (BOOL, UNIT):
        return "true" if (v is True or v == ()) else "false"
    if sort is INT:
        return str(v) if v >= 0 else f"(- {-v})"
    q = Fraction(v)
    text = decimal_text(abs(q))
    if text is None:
        text = f"(/ {abs(q.numerator)}.0 {q.denominator}.0)"
    return text if q >= 0 else f"(- {text})"


_SMT_OPS = {"not": "not", "and": "and", "or": "or", "xor": "xor", "=>": "=>", "=": "=",
            "<": "<", "<=": "<=", ">": ">", ">=": ">=", "+": "+", "-": "-", "*": "*",
            "/": "/", "neg": "-", "ite": "ite"}


def to_smt(e: Expr, name: Callable[[VarId], str]) -> str:
    if isinstance(e, Const):
        return smt_value(e.value, e.sort)
    if isinstance(e, Var):
        return name(e.var)
    args = " ".join(to_smt(a, name) for a in e.args)
    if e.op == "<>":
        return f"(not (= {args}))"
    return f"({_SMT_OPS[e.op]} {args})"


_PREC = {"=>": 1, "or": 2, "xor": 2, "and": 3,
         "=": 4, "<>": 4, "<": 4, "<=": 4, ">": 4, ">=": 4, "not": 5,
         "+": 6, "-": 6, "*": 7, "/": 7, "neg": 8}


def to_text(e: Expr, name: Callable[[VarId], str] = lambda v: v.name) -> str:
    """Render in the Lustre-like surface syntax (used in reports and manifests)."""

    def go(e: Expr, ctx: int) -> str:
        if isinstance(e, Var):
            return name(e.var)
        if isinstance(e, Const):
            if e.sort is REAL:
                q = Fraction(e.value)
                text = decimal_text(abs(q)) or f"({abs(q.numerator)}.0 / {q.denominator}.0)"
                s = text if q >= 0 else "-" + text
                return f"({s})" if q < 0 and ctx > 0 else s
            s = format_value(e.value)
            return f"({s})" if isinstance(e.value, int) and not isinstance(e.value, bool) and e.value < 0 and ctx > 0 else s
        if e.op == "ite":
            s = f"if {go(e.args[0], 0)} then {go(e.args[1], 0)} else {go(e.args[2], 0)}"
            return f"({s})" if ctx > 0 else s
        p = _PREC[e.op]
        if e.op == "not":
            s = f"not {go(e.args[0], p)}"
        elif e.op == "neg":
            inner = go(e.args[0], p)
            s = f"-({inner})" if inner.startswith("-") else f"-{inner}"
        else:
            # left-assoc for arithmetic and and/or, right-assoc for =>
            lp, rp = (p + 1, p) if e.op == "=>" else (p, p + 1)
            if e.op in CMP_OPS:
                lp = rp = p + 1
            s = f"{go(e.args[0], lp)} {e.op} {go(e.args[1], rp)}"
        return f"({s})" if p < ctx else s

    return go(e, 0)
