"""Instantiation of node calls and translation into hierarchical modules.

Every call site becomes its own instance; instance ``k`` of node ``N`` inside
parent path ``P`` is named ``P.N<k>`` (``k`` counts calls of ``N`` in that
parent, from 0) and the main node is ``<Main>0``.  Variables are named
``<path>.<name>``.  Call arguments and results are copied through dedicated
tasks, so a parent never shares an interface variable with a child.

Temporal operators:

* ``x = c -> pre e`` with a literal ``c`` makes ``x`` (or, for outputs, a
  hidden register copied into ``x``) a state initialised to ``c``;
* a bare ``pre e`` gets a fresh register with no initial constraint;
* any other ``a -> b`` reads a per-instance ``__first`` flag.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..expr import BOOL, Expr, Sort, VarId, app, coerce, const, free_vars, var
from ..hierarchy import HierarchicalModule, SubmoduleBinding
from ..hypergraph import FunctionalAssign, Hypergraph, Task, validate_tg
from ..modules import Always, Contract, Module
from .ast import Binary, Call, Ident, Ite, Lit, Unary
from .lexer import LustreError
from .printer import expr_text
from .typecheck import SORTS, TypedProgram

_OPS = {"and": "and", "or": "or", "xor": "xor", "=>": "=>", "=": "=", "<>": "<>", "<": "<",
        "<=": "<=", ">": ">", ">=": ">=", "+": "+", "-": "-", "*": "*", "/": "/"}


class ElaborationError(LustreError):
    pass


@dataclass(frozen=True)
class Instance:
    path: str
    node: str
    children: tuple = ()  # (local name, Instance) in call order

    @property
    def local(self) -> str:
        return self.path.rsplit(".", 1)[-1]

    def walk(self):
        yield self
        for _, c in self.children:
            yield from c.walk()


def call_names(tp: TypedProgram, node: str) -> list[str]:
    """Local instance names of the calls in ``node``, in equation order."""
    seen: dict = {}
    out = []
    for _, call in tp.info(node).decl.calls():
        k = seen.get(call.node, 0)
        seen[call.node] = k + 1
        out.append(f"{call.node}{k}")
    return out


def instantiate(tp: TypedProgram, main: str | None = None, path: str | None = None) -> Instance:
    main = main or tp.last
    tp.info(main)
    path = path or f"{main}0"
    kids = tuple((name, instantiate(tp, call.node, f"{path}.{name}"))
                 for name, (_, call) in zip(call_names(tp, main), tp.info(main).decl.calls()))
    return Instance(path, main, kids)


def _literal(e) -> Lit | None:
    if isinstance(e, Lit):
        return e
    if isinstance(e, Unary) and e.op == "-" and isinstance(e.arg, Lit):
        return Lit(-e.arg.value, e.arg.sort, e.span)
    return None


class _Builder:
    def __init__(self, tp: TypedProgram, inst: Instance):
        self.info = tp.info(inst.node)
        self.path = inst.path
        self.tasks: list[Task] = []
        self.states: set = set()
        self.init: dict = {}
        self.fresh = 0
        self.first: VarId | None = None

    def v(self, name: str) -> VarId:
        return VarId(f"{self.path}.{name}", self.info.sorts[name])

    def task(self, tid: str, writes, exprs) -> None:
        reads = sorted(set().union(*(free_vars(x) for x in exprs)))
        self.tasks.append(Task(f"{self.path}:{tid}", reads, writes, FunctionalAssign(tuple(exprs))))

    def register(self, name: str, sort: Sort, init=None) -> VarId:
        s = VarId(f"{self.path}.{name}", sort)
        self.states.add(s)
        if init is not None:
            self.init[s] = coerce(init, sort)
        return s

    def first_flag(self) -> VarId:
        if self.first is None:
            self.first = self.register("__first", BOOL, True)
            self.task("__first'", (self.first.primed,), (const(False),))
        return self.first

    def tr(self, e, stateless: bool = False) -> Expr:
        if isinstance(e, Lit):
            return const(e.value, SORTS[e.sort])
        if isinstance(e, Ident):
            return var(self.v(e.name))
        if isinstance(e, Unary):
            if e.op == "not":
                return app("not", self.tr(e.arg, stateless))
            if e.op == "-":
                return app("neg", self.tr(e.arg, stateless))
            x = self.tr(e.arg, stateless)
            s = self.register(f"__pre{self.fresh}", x.sort)
            self.fresh += 1
            self.task(s.primed.name.rsplit(".", 1)[-1], (s.primed,), (x,))
            return var(s)
        if isinstance(e, Ite):
            return app("ite", self.tr(e.cond, stateless), self.tr(e.then, stateless), self.tr(e.other, stateless))
        if isinstance(e, Binary):
            if e.op == "->":
                return app("ite", var(self.first_flag()), self.tr(e.left), self.tr(e.right))
            return app(_OPS[e.op], self.tr(e.left, stateless), self.tr(e.right, stateless))
        raise ElaborationError("node call inside an expression", e.span)


def elaborate(tp: TypedProgram, inst: Instance) -> HierarchicalModule:
    b = _Builder(tp, inst)
    n = b.info.decl
    outputs = {p.name for p in n.outputs}
    bindings = []
    child_edges: list[Task] = []
    kids = dict(inst.children)
    names = iter(call_names(tp, inst.node))
    for eq in n.equations:
        rhs = eq.rhs
        if isinstance(rhs, Call):
            cname = next(names)
            hc = elaborate(tp, kids[cname])
            callee = tp.info(rhs.node).decl
            cpath = kids[cname].path
            for p, a in zip(callee.inputs, rhs.args):
                cin = VarId(f"{cpath}.{p.name}", SORTS[p.type])
                b.task(f"{cname}.{p.name}", (cin,), (b.tr(a),))
            for x, p in zip(eq.lhs, callee.outputs):
                cout = VarId(f"{cpath}.{p.name}", SORTS[p.type])
                b.task(x, (b.v(x),), (var(cout),))
            bindings.append(SubmoduleBinding(cpath, hc, hc.module.react.edge_ids))
            child_edges.extend(hc.module.react.edges)
            b.states |= hc.module.states
            b.init.update(hc.module.init)
            continue
        x = eq.lhs[0]
        lit = _literal(rhs.left) if isinstance(rhs, Binary) and rhs.op == "->" else None
        if lit is not None and isinstance(rhs.right, Unary) and rhs.right.op == "pre":
            sort = b.info.sorts[x]
            if x in outputs:
                st = b.register(f"__pre_{x}", sort, lit.value)
                b.task(x, (b.v(x),), (var(st),))
            else:
                st = b.register(x, sort, lit.value)
            b.task(f"{x}'", (st.primed,), (b.tr(rhs.right.arg),))
            continue
        b.task(x, (b.v(x),), (b.tr(rhs),))
    react = Hypergraph.of([*b.tasks, *child_edges])
    rep = validate_tg(react)
    if not rep.ok:
        first = rep.violations[0]
        what = "combinational cycle" if first.condition == "i" else "ill-formed dataflow"
        raise ElaborationError(f"{inst.path}: {what}: {first.message}", n.span)
    m = Module({b.v(p.name) for p in n.inputs}, {b.v(p.name) for p in n.outputs},
               frozenset(b.states), b.init, react, inst.path)
    contract = None
    if n.contract is not None:
        contract = Contract([Always(b.tr(a, True), expr_text(a)) for a in n.contract.assumes],
                            [Always(b.tr(g, True), expr_text(g)) for g in n.contract.guarantees])
    return HierarchicalModule(m, tuple(bindings), contract, inst.node)


def elaborate_main(tp: TypedProgram, main: str | None = None) -> HierarchicalModule:
    return elaborate(tp, instantiate(tp, main))
