"""Source-to-source decomposition of hierarchical nodes into adapter nodes.

Each node that calls other nodes is rewritten in place (same name): its call
equations are dropped, every call result becomes a new input and every call
argument a new output, named ``<Callee><k>_<param>``.  The contract gains the
callees' guarantees as assumptions and the callees' assumptions as
guarantees, with callee parameters renamed to the promoted names.  Nodes
without calls pass through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lustre.ast import ContractSpec, Equation, Ident, NodeDecl, Param, Program, substitute
from .lustre.elaborate import call_names
from .lustre.lexer import LustreError
from .lustre.printer import expr_text
from .lustre.typecheck import TypedProgram


class DecomposeError(LustreError):
    pass


@dataclass(frozen=True)
class AdapterInfo:
    node: str
    promoted_inputs: dict = field(default_factory=dict)   # promoted name -> "Callee<k>.param"
    promoted_outputs: dict = field(default_factory=dict)
    calls: tuple = ()   # (local instance name, callee)


def promoted(instance: str, param: str) -> str:
    return f"{instance}_{param}".replace(".", "_")


def adapter_node(tp: TypedProgram, name: str) -> tuple[NodeDecl, AdapterInfo]:
    n = tp.info(name).decl
    calls = n.calls()
    if not calls:
        return n, AdapterInfo(name)
    taken = {p.name for p in n.params()}
    new_in: list[Param] = []
    new_out: list[Param] = []
    eqs: list[Equation] = [eq for eq in n.equations if eq not in {c[0] for c in calls}]
    assumes = list(n.contract.assumes) if n.contract else []
    guarantees = list(n.contract.guarantees) if n.contract else []
    info_in, info_out = {}, {}
    inst_names = call_names(tp, name)

    def claim(x: str) -> str:
        if x in taken:
            raise DecomposeError(f"{name}: promoted name {x!r} clashes with an existing variable", n.span)
        taken.add(x)
        return x

    for (eq, call), inst in zip(calls, inst_names):
        callee = tp.info(call.node).decl
        rename = {}
        for p, arg in zip(callee.inputs, call.args):
            x = claim(promoted(inst, p.name))
            rename[p.name] = Ident(x)
            new_out.append(Param(x, p.type))
            info_out[x] = f"{inst}.{p.name}"
            eqs.append(Equation((x,), arg))
        for lhs, p in zip(eq.lhs, callee.outputs):
            x = claim(promoted(inst, p.name))
            rename[p.name] = Ident(x)
            new_in.append(Param(x, p.type))
            info_in[x] = f"{inst}.{p.name}"
            eqs.append(Equation((lhs,), Ident(x)))
        if callee.contract is not None:
            assumes.extend(substitute(g, rename) for g in callee.contract.guarantees)
            guarantees.extend(substitute(a, rename) for a in callee.contract.assumes)
    contract = ContractSpec(tuple(assumes), tuple(guarantees))
    decl = NodeDecl(name, n.inputs + tuple(new_in), n.outputs + tuple(new_out), contract, n.locals,
                    tuple(eqs), n.span)
    return decl, AdapterInfo(name, info_in, info_out, tuple(zip(inst_names, (c.node for _, c in calls))))


@dataclass(frozen=True)
class DecomposedProgram:
    program: Program
    adapters: dict   # node name -> AdapterInfo, only for rewritten nodes
    main: str

    def manifest(self, tp: TypedProgram) -> dict:
        """Which node checks which obligation, for every instance reachable from main."""
        from .lustre.elaborate import instantiate
        obligations = []
        for inst in instantiate(tp, self.main).walk():
            kind = "adapter" if inst.node in self.adapters else "node"
            obligations.append({"instance": inst.path, "node": inst.node, "kind": kind})
        return {
            "main": self.main,
            "nodes": {n.name: ({"kind": "adapter",
                                "promoted_inputs": self.adapters[n.name].promoted_inputs,
                                "promoted_outputs": self.adapters[n.name].promoted_outputs}
                               if n.name in self.adapters else {"kind": "leaf"})
                      for n in self.program.nodes},
            "obligations": obligations,
            "contracts": {n.name: {"assume": [expr_text(a) for a in n.contract.assumes],
                                   "guarantee": [expr_text(g) for g in n.contract.guarantees]}
                          for n in self.program.nodes if n.contract is not None},
        }


def decompose_program(tp: TypedProgram, main: str | None = None) -> DecomposedProgram:
    """Rewrite every hierarchical node of the program into its adapter node."""
    main = main or tp.last
    tp.info(main)
    nodes, adapters = [], {}
    for n in tp.program.nodes:
        decl, info = adapter_node(tp, n.name)
        nodes.append(decl)
        if n.calls():
            adapters[n.name] = info
    return DecomposedProgram(Program(tuple(nodes)), adapters, main)
