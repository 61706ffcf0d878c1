"""Sort checking and well-formedness of parsed programs."""

from __future__ import annotations

from dataclasses import dataclass

from ..expr import BOOL, INT, REAL, Sort
from .ast import Binary, Call, Ident, Ite, Lit, NodeDecl, Program, Unary, walk
from .lexer import LustreError

SORTS = {"bool": BOOL, "int": INT, "real": REAL}
ARITH = {"+", "-", "*", "/"}
LOGIC = {"and", "or", "xor", "=>"}
ORDER = {"<", "<=", ">", ">="}


class LustreTypeError(LustreError):
    pass


@dataclass(frozen=True)
class NodeInfo:
    decl: NodeDecl
    sorts: dict

    @property
    def name(self) -> str:
        return self.decl.name

    def sort(self, name: str) -> Sort:
        return self.sorts[name]


@dataclass(frozen=True)
class TypedProgram:
    program: Program
    nodes: dict
    order: tuple  # callees before callers

    def info(self, name: str) -> NodeInfo:
        try:
            return self.nodes[name]
        except KeyError:
            raise LustreTypeError(f"unknown node {name!r}") from None

    @property
    def last(self) -> str:
        if not self.program.nodes:
            raise LustreTypeError("program has no nodes")
        return self.program.nodes[-1].name


def _literal_divisor(e) -> bool:
    if isinstance(e, Unary) and e.op == "-":
        e = e.arg
    return isinstance(e, Lit) and e.sort == "real" and e.value != 0


def expr_sort(e, env: dict, *, stateless: bool = False) -> Sort:
    def go(e) -> Sort:
        if isinstance(e, Lit):
            return SORTS[e.sort]
        if isinstance(e, Ident):
            if e.name not in env:
                raise LustreTypeError(f"unknown variable {e.name!r}", e.span)
            return env[e.name]
        if isinstance(e, Call):
            raise LustreTypeError("node calls must form the whole right-hand side of an equation", e.span)
        if isinstance(e, Ite):
            if go(e.cond) is not BOOL:
                raise LustreTypeError("condition must be bool", e.cond.span)
            a, b = go(e.then), go(e.other)
            if a is not b:
                raise LustreTypeError(f"branches have sorts {a} and {b}", e.span)
            return a
        if isinstance(e, Unary):
            s = go(e.arg)
            if e.op == "not":
                if s is not BOOL:
                    raise LustreTypeError(f"'not' applied to {s}", e.span)
                return BOOL
            if e.op == "-":
                if s not in (INT, REAL):
                    raise LustreTypeError(f"unary minus applied to {s}", e.span)
                return s
            if stateless:
                raise LustreTypeError("'pre' is not allowed here", e.span)
            return s
        op = e.op
        if op == "->" and stateless:
            raise LustreTypeError("'->' is not allowed here", e.span)
        a, b = go(e.left), go(e.right)
        if op in ARITH:
            if a is not b or a not in (INT, REAL):
                raise LustreTypeError(f"'{op}' needs numeric operands of one sort, got {a} and {b}", e.span)
            if op == "/":
                if a is INT:
                    raise LustreTypeError("integer division is not supported", e.span)
                if not _literal_divisor(e.right):
                    raise LustreTypeError("division is only allowed by a nonzero real literal", e.span)
            return a
        if op in LOGIC:
            if a is not BOOL or b is not BOOL:
                raise LustreTypeError(f"'{op}' needs bool operands, got {a} and {b}", e.span)
            return BOOL
        if op in ORDER:
            if a is not b or a not in (INT, REAL):
                raise LustreTypeError(f"'{op}' needs numeric operands of one sort, got {a} and {b}", e.span)
            return BOOL
        if op in ("=", "<>"):
            if a is not b:
                raise LustreTypeError(f"'{op}' compares {a} with {b}", e.span)
            return BOOL
        if op == "->":
            if a is not b:
                raise LustreTypeError(f"'->' joins {a} and {b}", e.span)
            return a
        raise LustreTypeError(f"unknown operator {op!r}", e.span)

    return go(e)


def _check_node(n: NodeDecl, sigs: dict) -> NodeInfo:
    sorts: dict = {}
    for p in n.params():
        if p.name in sorts:
            raise LustreTypeError(f"{n.name}: duplicate declaration of {p.name!r}", p.span)
        if p.name.startswith("__"):
            raise LustreTypeError(f"{n.name}: names starting with '__' are reserved", p.span)
        sorts[p.name] = SORTS[p.type]
    inputs = {p.name for p in n.inputs}
    defined: dict = {}
    for eq in n.equations:
        for x in eq.lhs:
            if x in inputs:
                raise LustreTypeError(f"{n.name}: input {x!r} cannot be defined", eq.span)
            if x not in sorts:
                raise LustreTypeError(f"{n.name}: {x!r} is not declared", eq.span)
            if x in defined:
                raise LustreTypeError(f"{n.name}: {x!r} is defined twice", eq.span)
            defined[x] = eq
        rhs = eq.rhs
        if isinstance(rhs, Call):
            if rhs.node not in sigs:
                raise LustreTypeError(f"unknown node {rhs.node!r}", rhs.span)
            ins, outs = sigs[rhs.node]
            if len(rhs.args) != len(ins):
                raise LustreTypeError(f"{rhs.node} expects {len(ins)} arguments, got {len(rhs.args)}", rhs.span)
            for a, s in zip(rhs.args, ins):
                got = expr_sort(a, sorts)
                if got is not s:
                    raise LustreTypeError(f"argument of sort {got} where {s} is expected", rhs.span)
            if len(eq.lhs) != len(outs):
                raise LustreTypeError(f"{rhs.node} returns {len(outs)} values, {len(eq.lhs)} bound", eq.span)
            for x, s in zip(eq.lhs, outs):
                if sorts[x] is not s:
                    raise LustreTypeError(f"{x!r} has sort {sorts[x]} but receives {s}", eq.span)
        else:
            if len(eq.lhs) != 1:
                raise LustreTypeError("only node calls can define several variables", eq.span)
            got = expr_sort(rhs, sorts)
            if got is not sorts[eq.lhs[0]]:
                raise LustreTypeError(f"{eq.lhs[0]!r} has sort {sorts[eq.lhs[0]]} but is defined as {got}", eq.span)
    for p in (*n.outputs, *n.locals):
        if p.name not in defined:
            raise LustreTypeError(f"{n.name}: {p.name!r} has no defining equation", p.span)
    if n.contract is not None:
        io = {p.name: sorts[p.name] for p in (*n.inputs, *n.outputs)}
        # Assumptions may mention outputs: an adapter assumes its children's
        # guarantees, which constrain the values it feeds them.
        for e in n.contract.assumes:
            if expr_sort(e, io, stateless=True) is not BOOL:
                raise LustreTypeError("assumption must be bool", e.span)
        for e in n.contract.guarantees:
            if expr_sort(e, io, stateless=True) is not BOOL:
                raise LustreTypeError("guarantee must be bool", e.span)
    return NodeInfo(n, sorts)


def typecheck(p: Program) -> TypedProgram:
    sigs = {}
    for n in p.nodes:
        if n.name in sigs:
            raise LustreTypeError(f"node {n.name!r} is declared twice", n.span)
        sigs[n.name] = (tuple(SORTS[x.type] for x in n.inputs), tuple(SORTS[x.type] for x in n.outputs))
    infos = {n.name: _check_node(n, sigs) for n in p.nodes}
    calls = {n.name: [c.node for _, c in n.calls()] for n in p.nodes}
    order: list[str] = []
    state: dict = {}

    def visit(name: str, path: list[str]):
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            cyc = path[path.index(name):] + [name]
            raise LustreTypeError("recursive node calls: " + " -> ".join(cyc), p.node(name).span)
        state[name] = 1
        for c in calls[name]:
            visit(c, path + [name])
        state[name] = 2
        order.append(name)

    for n in p.nodes:
        visit(n.name, [])
    return TypedProgram(p, infos, tuple(order))


def uses_temporal(e) -> bool:
    return any(isinstance(x, Unary) and x.op == "pre" or isinstance(x, Binary) and x.op == "->" for x in walk(e))
