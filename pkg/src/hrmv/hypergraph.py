"""Directed hypergraphs of variables and tasks.

A hyperedge (:class:`Task`) reads an ordered list of variables and writes
another; its payload is a relation that must be total in the reads.  A
:class:`Hypergraph` that satisfies the four task-graph conditions (acyclic, no
isolated vertex, single writer, consistent incidence) is a task graph; the
class itself also represents the possibly cyclic results of abstraction and
union.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .expr import (BOOL, TRUE, Expr, Value, VarId, app, conj, evaluate, free_vars,
                   to_text, var)


class GraphError(Exception):
    pass


class CycleError(GraphError):
    def __init__(self, cycle: list[VarId]):
        self.cycle = cycle
        super().__init__("cycle through " + " -> ".join(v.name for v in cycle))


class WriteConflict(GraphError):
    def __init__(self, vertices: Iterable[VarId]):
        self.vertices = sorted(vertices)
        super().__init__("written by both graphs: " + ", ".join(v.name for v in self.vertices))


# -- relations ---------------------------------------------------------------

@dataclass(frozen=True)
class FunctionalAssign:
    """One expression per write variable, in write order."""
    exprs: tuple


@dataclass(frozen=True)
class NondetChoose:
    """Any write valuation satisfying ``pred`` (over reads and writes)."""
    pred: Expr


@dataclass(frozen=True)
class Opaque:
    """Interface relation standing in for an abstracted subgraph.

    With ``hist`` set, the task also reads the history bit and writes its
    primed copy, so that ``hist' = hist and assume`` and the guarantee is
    required only while the assumption has held at every round so far.
    """
    name: str
    assume: Expr = TRUE
    guarantee: Expr = TRUE
    hist: VarId | None = None


RelationSpec = Union[FunctionalAssign, NondetChoose, Opaque]


@dataclass(frozen=True)
class Task:
    id: str
    reads: tuple
    writes: tuple
    relation: RelationSpec = field(default_factory=lambda: NondetChoose(TRUE))

    def __post_init__(self):
        object.__setattr__(self, "reads", tuple(self.reads))
        object.__setattr__(self, "writes", tuple(self.writes))
        if isinstance(self.relation, FunctionalAssign) and len(self.relation.exprs) != len(self.writes):
            raise GraphError(f"task {self.id}: {len(self.writes)} writes but {len(self.relation.exprs)} expressions")

    def formula(self) -> Expr:
        """The relation as a predicate over reads and writes."""
        rel = self.relation
        if isinstance(rel, FunctionalAssign):
            return conj(app("=", var(w), e) for w, e in zip(self.writes, rel.exprs))
        if isinstance(rel, NondetChoose):
            return rel.pred
        if rel.hist is None:
            return app("=>", rel.assume, rel.guarantee)
        now = app("and", var(rel.hist), rel.assume)
        return app("and", app("=", var(rel.hist.primed), now), app("=>", now, rel.guarantee))

    def holds(self, env: Mapping[VarId, Value]) -> bool:
        return bool(evaluate(self.formula(), env))

    def signature(self) -> tuple:
        return (self.reads, self.writes, self.relation)


# -- validation reports (shared by graph, module and hierarchy checks) -------

@dataclass(frozen=True)
class Violation:
    condition: str
    message: str
    witnesses: tuple = ()


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def add(self, condition: str, message: str, witnesses: Iterable = ()) -> None:
        self.violations.append(Violation(condition, message, tuple(witnesses)))

    def extend(self, other: ValidationReport, prefix: str = "") -> None:
        for v in other.violations:
            self.violations.append(Violation(prefix + v.condition, v.message, v.witnesses))

    def conditions(self) -> set[str]:
        return {v.condition for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"({v.condition}) {v.message}" for v in self.violations)


# -- hypergraph ----------------------------------------------------------------

@dataclass(frozen=True)
class Hypergraph:
    vertices: frozenset = frozenset()
    edges: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.id)))

    @classmethod
    def of(cls, edges: Iterable[Task], extra: Iterable[VarId] = ()) -> Hypergraph:
        edges = list(edges)
        vs = set(extra)
        for e in edges:
            vs.update(e.reads)
            vs.update(e.writes)
        return cls(frozenset(vs), tuple(edges))

    def edge(self, eid: str) -> Task:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    @property
    def edge_ids(self) -> frozenset[str]:
        return frozenset(e.id for e in self.edges)

    def vertex(self, name: str) -> VarId:
        for v in self.vertices:
            if v.name == name:
                return v
        raise KeyError(name)

    def writers(self) -> dict[VarId, list[Task]]:
        out: dict[VarId, list[Task]] = defaultdict(list)
        for e in self.edges:
            for w in e.writes:
                out[w].append(e)
        return out

    def readers(self) -> dict[VarId, list[Task]]:
        out: dict[VarId, list[Task]] = defaultdict(list)
        for e in self.edges:
            for r in set(e.reads):
                out[r].append(e)
        return out

    @property
    def initial(self) -> frozenset[VarId]:
        written = {w for e in self.edges for w in e.writes}
        return frozenset(v for v in self.vertices if v not in written)

    @property
    def terminal(self) -> frozenset[VarId]:
        read = {r for e in self.edges for r in e.reads}
        return frozenset(v for v in self.vertices if v not in read)

    def successors(self) -> dict[VarId, set[VarId]]:
        succ: dict[VarId, set[VarId]] = defaultdict(set)
        for e in self.edges:
            for r in e.reads:
                succ[r].update(e.writes)
        return succ

    def find_cycle(self) -> list[VarId] | None:
        succ = self.successors()
        color: dict[VarId, int] = {}
        stack_path: list[VarId] = []

        for root in sorted(self.vertices | set(succ)):
            if color.get(root):
                continue
            # iterative DFS keeping the current path for cycle extraction
            stack = [(root, iter(sorted(succ.get(root, ()))))]
            color[root] = 1
            stack_path.append(root)
            while stack:
                v, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    color[v] = 2
                    stack.pop()
                    stack_path.pop()
                    continue
                c = color.get(nxt, 0)
                if c == 1:
                    i = stack_path.index(nxt)
                    return stack_path[i:] + [nxt]
                if c == 0:
                    color[nxt] = 1
                    stack_path.append(nxt)
                    stack.append((nxt, iter(sorted(succ.get(nxt, ())))))
        return None

    @property
    def is_acyclic(self) -> bool:
        return self.find_cycle() is None

    def task_order(self) -> list[Task]:
        """Tasks in a topological order, ties broken by edge id."""
        levels = level_map(self)
        return sorted(self.edges, key=lambda e: (max((levels[w] for w in e.writes), default=0), e.id))

    def __len__(self) -> int:
        return len(self.edges)


TaskGraph = Hypergraph


def validate_tg(g: Hypergraph) -> ValidationReport:
    """Check the four task-graph conditions; an empty report means ``g`` is a TG."""
    rep = ValidationReport()
    cycle = g.find_cycle()
    if cycle is not None:
        rep.add("i", "graph has a cycle: " + " -> ".join(v.name for v in cycle), cycle)
    incident = {v for e in g.edges for v in itertools.chain(e.reads, e.writes)}
    isolated = sorted(g.vertices - incident)
    if isolated:
        rep.add("ii", "isolated vertices: " + ", ".join(v.name for v in isolated), isolated)
    for v, ws in sorted(g.writers().items()):
        if len(ws) > 1:
            rep.add("iii", f"{v.name} written by {', '.join(e.id for e in ws)}", [v, *(e.id for e in ws)])
    for e in g.edges:
        dup = sorted({w for w in e.writes if e.writes.count(w) > 1})
        if dup:
            rep.add("iii", f"{e.id} writes {', '.join(v.name for v in dup)} more than once", [e.id, *dup])
        both = sorted(set(e.reads) & set(e.writes))
        if both:
            rep.add("iv", f"{e.id} both reads and writes {', '.join(v.name for v in both)}", [e.id, *both])
        stray = sorted((set(e.reads) | set(e.writes)) - g.vertices)
        if stray:
            rep.add("iv", f"{e.id} refers to non-vertices {', '.join(v.name for v in stray)}", [e.id, *stray])
        rel = e.relation
        if isinstance(rel, (NondetChoose, Opaque)):
            scope = set(e.reads) | set(e.writes)
            loose = sorted(free_vars(e.formula()) - scope)
            if loose:
                rep.add("iv", f"{e.id} relation mentions {', '.join(v.name for v in loose)} outside its read/write sets",
                        [e.id, *loose])
        elif isinstance(rel, FunctionalAssign):
            loose = sorted(set().union(*(free_vars(x) for x in rel.exprs)) - set(e.reads)) if rel.exprs else []
            if loose:
                rep.add("iv", f"{e.id} expression reads {', '.join(v.name for v in loose)} outside its read set",
                        [e.id, *loose])
    return rep


def level_map(g: Hypergraph) -> dict[VarId, int]:
    """Longest-path level of each vertex; a write sits one above its task's deepest read."""
    writer = {}
    for e in g.edges:
        for w in e.writes:
            writer[w] = e
    memo: dict[VarId, int] = {}
    visiting: set[VarId] = set()

    def level(v: VarId) -> int:
        if v in memo:
            return memo[v]
        e = writer.get(v)
        if e is None:
            memo[v] = 0
            return 0
        if v in visiting:
            raise CycleError(g.find_cycle() or [v])
        visiting.add(v)
        lv = 1 + max((level(r) for r in e.reads), default=0)
        visiting.discard(v)
        memo[v] = lv
        return lv

    for v in sorted(g.vertices):
        level(v)
    return memo


def longest_path_levels(g: Hypergraph) -> list[frozenset]:
    """Ordered partition of the vertices by longest-path level (empty levels dropped)."""
    levels = level_map(g)
    groups: dict[int, set[VarId]] = defaultdict(set)
    for v, lv in levels.items():
        groups[lv].add(v)
    return [frozenset(groups[k]) for k in sorted(groups)]


def await_dep(g: Hypergraph, x: VarId, y: VarId) -> bool:
    """True iff a directed path leads from ``x`` to ``y``."""
    for v in (x, y):
        if v not in g.vertices:
            raise GraphError(f"unknown vertex {v.name}")
    if x == y:
        return False
    succ = g.successors()
    seen = set()
    todo = [x]
    while todo:
        v = todo.pop()
        for w in succ.get(v, ()):
            if w == y:
                return True
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return False


def subgraph(g: Hypergraph, edge_ids: Iterable[str]) -> Hypergraph:
    edge_ids = set(edge_ids)
    missing = edge_ids - g.edge_ids
    if missing:
        raise GraphError("not edges of the graph: " + ", ".join(sorted(missing)))
    return Hypergraph.of(e for e in g.edges if e.id in edge_ids)


def abstraction(g: Hypergraph, sub: Hypergraph, iface_reads: Iterable[VarId], iface_writes: Iterable[VarId],
                spec: RelationSpec, edge_id: str | None = None) -> Hypergraph:
    """Replace ``sub`` inside ``g`` by one fresh edge from its reads to its writes.

    Non-interface writes of ``sub`` are dropped; the result may contain cycles.
    """
    iface_reads, iface_writes = tuple(iface_reads), tuple(iface_writes)
    if not set(sub.edges) <= set(g.edges):
        raise GraphError("not a subgraph of the graph")
    if set(iface_reads) != sub.initial:
        raise GraphError("interface reads must be exactly the subgraph's initial vertices")
    inner = sub.vertices - sub.initial
    if not set(iface_writes) <= inner:
        raise GraphError("interface writes must be written inside the subgraph")
    rest = [e for e in g.edges if e not in set(sub.edges)]
    used_outside = {v for e in rest for v in itertools.chain(e.reads, e.writes)}
    leaked = sorted((inner - set(iface_writes)) & used_outside)
    if leaked:
        raise GraphError("interface misses vertices used outside: " + ", ".join(v.name for v in leaked))
    if edge_id is None:
        n = len(g.edges) + 1
        while f"e{n}" in g.edge_ids:
            n += 1
        edge_id = f"e{n}"
    fresh = Task(edge_id, iface_reads, iface_writes, spec)
    return Hypergraph.of([*rest, fresh], g.vertices - (inner - set(iface_writes)))


def expand(g: Hypergraph, edge_id: str, sub: Hypergraph) -> Hypergraph:
    """Inverse of :func:`abstraction`: put ``sub`` back in place of one edge."""
    rest = [e for e in g.edges if e.id != edge_id]
    if len(rest) == len(g.edges):
        raise GraphError(f"no edge {edge_id}")
    return Hypergraph.of([*rest, *sub.edges], g.vertices)


def union(g1: Hypergraph, g2: Hypergraph) -> tuple[Hypergraph, bool]:
    """Graph union with shared vertices merged, plus its acyclicity flag."""
    w1 = {w for e in g1.edges for w in e.writes}
    shared = set(g1.edges) & set(g2.edges)
    w2 = {w for e in g2.edges if e not in shared for w in e.writes}
    clash = (w1 & w2)
    if clash:
        raise WriteConflict(clash)
    ids1 = {e.id: e for e in g1.edges}
    for e in g2.edges:
        if e.id in ids1 and ids1[e.id] != e:
            raise GraphError(f"edge id {e.id} used by two different tasks")
    edges = {e.id: e for e in itertools.chain(g1.edges, g2.edges)}
    g = Hypergraph(g1.vertices | g2.vertices, tuple(edges.values()))
    return g, g.is_acyclic


def canonical(g: Hypergraph) -> tuple:
    """Id-free form: equal for graphs that differ only in edge names."""
    return (g.vertices, frozenset(e.signature() for e in g.edges))


def isomorphic(g1: Hypergraph, g2: Hypergraph) -> bool:
    return canonical(g1) == canonical(g2)


def relation_label(e: Task) -> str:
    rel = e.relation
    if isinstance(rel, FunctionalAssign):
        return "; ".join(f"{w.name} := {to_text(x)}" for w, x in zip(e.writes, rel.exprs))
    if isinstance(rel, NondetChoose):
        return "choose " + to_text(rel.pred)
    head = f"Hist({to_text(rel.assume)})" if rel.hist is not None else to_text(rel.assume)
    return f"{rel.name}: {head} => {to_text(rel.guarantee)}"


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: Hypergraph, name: str = "G", clusters: Mapping[str, Iterable[str]] | None = None,
           marked: Iterable[VarId] = ()) -> str:
    """DOT text: vertices as points, each hyperedge as a numbered junction node."""
    marked = set(marked)
    lines = [f"digraph {_q(name)} {{"]
    if g.vertices:
        lines.append("  node [shape=point, width=0.08];")
    for v in sorted(g.vertices):
        shape = ", shape=circle, width=0.12" if v in marked else ""
        lines.append(f"  {_q('v:' + v.name)} [xlabel={_q(v.name)}{shape}];")
    number = {e.id: i for i, e in enumerate(g.edges, 1)}
    in_cluster = {}
    for cname, eids in (clusters or {}).items():
        for eid in eids:
            in_cluster[eid] = cname

    def junction(e: Task) -> str:
        return f"  {_q('e:' + e.id)} [shape=circle, width=0.25, label={_q(str(number[e.id]))}, tooltip={_q(e.id)}];"

    for cname in sorted(clusters or {}):
        members = [e for e in g.edges if in_cluster.get(e.id) == cname]
        if not members:
            continue
        lines.append(f"  subgraph {_q('cluster_' + cname)} {{")
        lines.append(f"    label={_q(cname)}; style=dashed;")
        lines.extend("  " + junction(e) for e in members)
        lines.append("  }")
    for e in g.edges:
        if e.id not in in_cluster:
            lines.append(junction(e))
    for e in g.edges:
        for r in e.reads:
            lines.append(f"  {_q('v:' + r.name)} -> {_q('e:' + e.id)} [arrowhead=none];")
        for w in e.writes:
            lines.append(f"  {_q('e:' + e.id)} -> {_q('v:' + w.name)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def check_totality(task: Task) -> bool | None:
    """Brute-force totality check for a task over bool-only variables.

    Returns ``None`` when some variable is not bool (totality is then assumed).
    """
    vs = list(task.reads) + list(task.writes)
    if any(v.sort is not BOOL for v in vs):
        return None
    for rv in itertools.product((False, True), repeat=len(task.reads)):
        env = dict(zip(task.reads, rv))
        if not any(task.holds({**env, **dict(zip(task.writes, wv))})
                   for wv in itertools.product((False, True), repeat=len(task.writes))):
            return False
    return True
