"""Hierarchical modules, adapter extraction and proof-obligation generation.

A hierarchical module is a flat module whose task graph embeds each child's
task graph as a designated set of edges.  Removing those edges and flipping
the children's interfaces onto the parent yields the *adapter*; the children
composed with the adapter, with the child interfaces hidden, behave exactly
like the flat module.  Contracts of the children and of the parent turn into
one obligation per child plus one for the adapter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .expr import BOOL, VarId, conj, free_vars
from .hypergraph import Hypergraph, Opaque, Task, ValidationReport, canonical, subgraph
from .modules import Contract, Module, compose, hide, validate_module


@dataclass(frozen=True)
class SubmoduleBinding:
    """Child ``name`` of a hierarchy; ``edge_ids`` are its edges in the parent graph.

    Vertices are shared with the parent by name, so the io map is the identity.
    """
    name: str
    child: HierarchicalModule
    edge_ids: frozenset

    def __post_init__(self):
        object.__setattr__(self, "edge_ids", frozenset(self.edge_ids))

    @property
    def module(self) -> Module:
        return self.child.module


@dataclass(frozen=True)
class HierarchicalModule:
    module: Module
    bindings: tuple = ()
    contract: Contract | None = None
    node: str = ""

    def __post_init__(self):
        object.__setattr__(self, "bindings", tuple(self.bindings))

    @property
    def name(self) -> str:
        return self.module.name

    def binding(self, name: str) -> SubmoduleBinding:
        for b in self.bindings:
            if b.name == name:
                return b
        raise KeyError(name)

    def walk(self):
        """This hierarchy and all nested ones, parents first."""
        yield self
        for b in self.bindings:
            yield from b.child.walk()


def leaf(m: Module, contract: Contract | None = None, node: str = "") -> HierarchicalModule:
    return HierarchicalModule(m, (), contract, node)


def validate_hierarchy(h: HierarchicalModule) -> ValidationReport:
    rep = validate_module(h.module)
    m = h.module
    for b in h.bindings:
        c = b.module
        tag = b.name
        clash = (m.inputs & c.inputs) | (m.outputs & c.outputs)
        if clash:
            rep.add("i", f"{tag} shares interface variables with the parent: "
                    + ", ".join(sorted(v.name for v in clash)), sorted(clash))
        if not c.states <= m.states:
            extra = sorted(c.states - m.states)
            rep.add("ii", f"{tag} states missing from the parent: " + ", ".join(v.name for v in extra), extra)
        projected = {s: v for s, v in m.init.items() if s in c.states}
        if projected != dict(c.init):
            rep.add("iii", f"{tag} init differs from the parent's init restricted to its states", [tag])
        if not b.edge_ids <= m.react.edge_ids:
            rep.add("iv", f"{tag} edges missing from the parent graph: " + ", ".join(sorted(b.edge_ids - m.react.edge_ids)),
                    [tag])
        elif canonical(subgraph(m.react, b.edge_ids)) != canonical(c.react) or \
                set(subgraph(m.react, b.edge_ids).edges) != set(c.react.edges):
            rep.add("iv", f"{tag} graph is not the parent's subgraph on its edges", [tag])
        rep.extend(validate_hierarchy(b.child), f"{tag}:")
    bs = h.bindings
    for x in range(len(bs)):
        for y in range(x + 1, len(bs)):
            a, b = bs[x], bs[y]
            for what, sa, sb in (("outputs", a.module.outputs, b.module.outputs),
                                 ("states", a.module.states, b.module.states)):
                both = sa & sb
                if both:
                    rep.add("disjoint", f"{a.name} and {b.name} share {what}: "
                            + ", ".join(sorted(v.name for v in both)), sorted(both))
            if a.edge_ids & b.edge_ids:
                rep.add("disjoint", f"{a.name} and {b.name} share edges", sorted(a.edge_ids & b.edge_ids))
    return rep


class HierarchyError(Exception):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__(f"invalid hierarchical module:\n{report}")


def _require_valid(h: HierarchicalModule) -> None:
    rep = validate_hierarchy(h)
    if not rep.ok:
        raise HierarchyError(rep)


def flatten(h: HierarchicalModule) -> Module:
    """The flat module; children's graphs are already embedded in the parent's."""
    _require_valid(h)
    return h.module


def child_interface(h: HierarchicalModule) -> tuple[frozenset, frozenset, frozenset]:
    ins, outs, states = frozenset(), frozenset(), frozenset()
    for b in h.bindings:
        ins |= b.module.inputs
        outs |= b.module.outputs
        states |= b.module.states
    return ins, outs, states


def derive_adapter(h: HierarchicalModule) -> Module:
    _require_valid(h)
    m = h.module
    ins, outs, states = child_interface(h)
    bound = set().union(*(b.edge_ids for b in h.bindings)) if h.bindings else set()
    child_vertices = states | {s.primed for s in states}
    edges = [e for e in m.react.edges if e.id not in bound]
    for e in edges:
        touched = child_vertices & (set(e.reads) | set(e.writes))
        if touched:
            raise HierarchyError(_single("adapter", f"task {e.id} touches child state "
                                         + ", ".join(sorted(v.name for v in touched))))
    react = Hypergraph.of(edges)
    s = m.states - states
    name = f"{m.name}†" if m.name else "adapter"
    return Module(m.inputs | outs, m.outputs | ins, s, {k: v for k, v in m.init.items() if k in s}, react, name)


def _single(cond: str, msg: str) -> ValidationReport:
    rep = ValidationReport()
    rep.add(cond, msg)
    return rep


@dataclass(frozen=True)
class Decomposition:
    children: tuple
    adapter: Module
    hide_set: frozenset

    def recompose(self) -> Module:
        return hide(compose(*self.children, self.adapter), self.hide_set)


def decompose(h: HierarchicalModule) -> Decomposition:
    adapter = derive_adapter(h)
    ins, outs, _ = child_interface(h)
    return Decomposition(tuple(flatten(b.child) for b in h.bindings), adapter, ins | outs)


# -- abstraction -------------------------------------------------------------------

def hist_var(binding_name: str) -> VarId:
    return VarId(f"{binding_name}.__hist", BOOL)


def abstract_submodule(h: HierarchicalModule, name: str, c: Contract) -> Module:
    """Replace child ``name`` by one opaque task ``Hist(assume) => guarantee``.

    The result carries a fresh boolean history state and may be cyclic.
    """
    return abstract_all(h, {name: c})


def abstract_all(h: HierarchicalModule, contracts: Mapping[str, Contract]) -> Module:
    _require_valid(h)
    m = h.module
    edges = {e.id: e for e in m.react.edges}
    states, init = set(m.states), dict(m.init)
    for name, c in contracts.items():
        b = h.binding(name)
        cm = b.module
        if any(f.kind != "always" for f in (*c.assume, *c.guarantee)):
            raise ValueError("only always-properties can label an abstracted child")
        a = conj(f.p for f in c.assume)
        g = conj(f.p for f in c.guarantee)
        stray = (free_vars(a) - cm.inputs) | (free_vars(g) - cm.inputs - cm.outputs)
        if stray:
            raise ValueError(f"contract of {name} mentions non-interface variables: "
                             + ", ".join(sorted(v.name for v in stray)))
        for eid in b.edge_ids:
            del edges[eid]
        states -= cm.states
        for s in cm.states:
            init.pop(s, None)
        hv = hist_var(name)
        states.add(hv)
        init[hv] = True
        task = Task(f"{name}.contract", (*sorted(cm.inputs), hv), (*sorted(cm.outputs), hv.primed),
                    Opaque(name, a, g, hv))
        edges[task.id] = task
    react = Hypergraph.of(edges.values())
    return Module(m.inputs, m.outputs, frozenset(states), init, react, f"{m.name}[abstract]")


# -- obligations -------------------------------------------------------------------

@dataclass(frozen=True)
class Obligation:
    """``subject ∥ assume ⊑ guarantee`` for property-module contracts."""
    label: str
    subject: Module
    contract: Contract
    node: str = ""
    instances: tuple = field(default=())

    @property
    def guarantee_count(self) -> int:
        return len(self.contract.guarantee)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "node": self.node,
            "inputs": sorted(v.name for v in self.subject.inputs),
            "outputs": sorted(v.name for v in self.subject.outputs),
            "assume": [f.text() for f in self.contract.assume],
            "guarantee": [f.text() for f in self.contract.guarantee],
        }


def _contract_of(h: HierarchicalModule, subs: Mapping[str, Contract] | Sequence[Contract] | None,
                 k: int, b: SubmoduleBinding) -> Contract:
    if subs is None:
        return b.child.contract or Contract()
    if isinstance(subs, Mapping):
        return subs.get(b.name, b.child.contract or Contract())
    return subs[k]


def gen_obligations(h: HierarchicalModule, top: Contract | None = None,
                    subs: Mapping[str, Contract] | Sequence[Contract] | None = None) -> list[Obligation]:
    """One obligation per child and one for the adapter.

    Child ``j`` must satisfy its own contract; the adapter is assumed the top
    assumptions plus every child guarantee and must deliver the top
    guarantees plus every child assumption.
    """
    top = top if top is not None else (h.contract or Contract())
    if not h.bindings:
        return [Obligation("goal", flatten(h), top, h.node, (h.name,))]
    d = decompose(h)
    obs, extra_a, extra_g = [], [], []
    for k, b in enumerate(h.bindings):
        c = _contract_of(h, subs, k, b)
        obs.append(Obligation(f"sub:{b.name}", d.children[k], c, b.child.node, (b.name,)))
        extra_a.extend(c.guarantee)
        extra_g.extend(c.assume)
    adapter_c = Contract((*top.assume, *extra_a), (*top.guarantee, *extra_g))
    obs.append(Obligation("adapter", d.adapter, adapter_c, h.node, (h.name,)))
    return obs


def gen_obligations_recursive(h: HierarchicalModule) -> list[Obligation]:
    """Obligations for the whole tree, bottom-up: a hierarchical child is itself decomposed."""
    out: list[Obligation] = []
    for b in h.bindings:
        if b.child.bindings:
            out.extend(gen_obligations_recursive(b.child))
    for ob in gen_obligations(h):
        if ob.label.startswith("sub:"):
            b = h.binding(ob.label[4:])
            if b.child.bindings:
                continue
        out.append(ob if ob.label != "adapter" else
                   Obligation(f"adapter:{h.name}", ob.subject, ob.contract, ob.node, ob.instances))
    return out


def graph_clusters(h: HierarchicalModule) -> dict[str, Iterable[str]]:
    return {b.name: sorted(b.edge_ids) for b in h.bindings}
