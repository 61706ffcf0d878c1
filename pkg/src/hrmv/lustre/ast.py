"""Syntax trees for the Lustre/CoCoSpec subset.

Spans are carried for diagnostics but excluded from equality, so trees that
print the same compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOWHERE = Span(0, 0)


def _span():
    return field(default=NOWHERE, compare=False, repr=False)


@dataclass(frozen=True)
class Lit:
    value: Union[bool, int, Fraction]
    sort: str  # "bool" | "int" | "real"
    span: Span = _span()


@dataclass(frozen=True)
class Ident:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "not" | "pre"
    arg: "LExpr"
    span: Span = _span()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "LExpr"
    right: "LExpr"
    span: Span = _span()


@dataclass(frozen=True)
class Ite:
    cond: "LExpr"
    then: "LExpr"
    other: "LExpr"
    span: Span = _span()


@dataclass(frozen=True)
class Call:
    node: str
    args: tuple
    span: Span = _span()


LExpr = Union[Lit, Ident, Unary, Binary, Ite, Call]


@dataclass(frozen=True)
class Param:
    name: str
    type: str
    span: Span = _span()


@dataclass(frozen=True)
class ContractSpec:
    assumes: tuple = ()
    guarantees: tuple = ()


@dataclass(frozen=True)
class Equation:
    lhs: tuple
    rhs: LExpr
    span: Span = _span()


@dataclass(frozen=True)
class NodeDecl:
    name: str
    inputs: tuple
    outputs: tuple
    contract: ContractSpec | None
    locals: tuple
    equations: tuple
    span: Span = _span()

    def params(self) -> tuple:
        return self.inputs + self.outputs + self.locals

    def calls(self) -> list[tuple[Equation, Call]]:
        return [(eq, eq.rhs) for eq in self.equations if isinstance(eq.rhs, Call)]


@dataclass(frozen=True)
class Program:
    nodes: tuple = ()

    def node(self, name: str) -> NodeDecl:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [n.name for n in self.nodes]


def walk(e: LExpr):
    yield e
    if isinstance(e, Unary):
        yield from walk(e.arg)
    elif isinstance(e, Binary):
        yield from walk(e.left)
        yield from walk(e.right)
    elif isinstance(e, Ite):
        for x in (e.cond, e.then, e.other):
            yield from walk(x)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk(a)


def idents(e: LExpr) -> set[str]:
    return {x.name for x in walk(e) if isinstance(x, Ident)}


def substitute(e: LExpr, mapping: dict) -> LExpr:
    """Replace identifiers by expressions (simultaneously, so no capture)."""
    if isinstance(e, Ident):
        return mapping.get(e.name, e)
    if isinstance(e, Lit):
        return e
    if isinstance(e, Unary):
        return Unary(e.op, substitute(e.arg, mapping), e.span)
    if isinstance(e, Binary):
        return Binary(e.op, substitute(e.left, mapping), substitute(e.right, mapping), e.span)
    if isinstance(e, Ite):
        return Ite(substitute(e.cond, mapping), substitute(e.then, mapping), substitute(e.other, mapping), e.span)
    return Call(e.node, tuple(substitute(a, mapping) for a in e.args), e.span)
