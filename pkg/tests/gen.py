"""Hypothesis strategies for random task graphs, modules and obligations."""

from __future__ import annotations

from hypothesis import strategies as st

from hrmv.expr import BOOL, INT, VarId, app, const, var
from hrmv.hypergraph import FunctionalAssign, Hypergraph, NondetChoose, Task
from hrmv.modules import Always, Contract, Module


def bool_expr(draw, pool, depth=2):
    """A random boolean expression over ``pool`` (bool variables)."""
    if depth == 0 or not pool or draw(st.booleans()):
        if pool and draw(st.integers(0, 3)):
            return var(draw(st.sampled_from(pool)))
        return const(draw(st.booleans()))
    op = draw(st.sampled_from(["not", "and", "or", "xor", "=>", "="]))
    if op == "not":
        return app("not", bool_expr(draw, pool, depth - 1))
    return app(op, bool_expr(draw, pool, depth - 1), bool_expr(draw, pool, depth - 1))


def _task(draw, tid, reads, writes):
    """A total task: functional, or a choice that always admits the functional answer."""
    exprs = [bool_expr(draw, reads) for _ in writes]
    if draw(st.booleans()):
        return Task(tid, reads, writes, FunctionalAssign(tuple(exprs)))
    fallback = app("and", *[app("=", var(w), e) for w, e in zip(writes, exprs)]) if len(writes) > 1 \
        else app("=", var(writes[0]), exprs[0])
    extra = bool_expr(draw, list(reads) + list(writes))
    return Task(tid, reads, writes, NondetChoose(app("or", fallback, extra)))


@st.composite
def task_graphs(draw, max_vertices=8):
    """A valid bool-sorted task graph; vertex order is a topological order."""
    n = draw(st.integers(2, max_vertices))
    vs = [VarId(f"v{i}") for i in range(n)]
    n_init = draw(st.integers(1, n - 1))
    edges = []
    i = n_init
    while i < n:
        width = draw(st.integers(1, min(2, n - i)))
        writes = tuple(vs[i:i + width])
        reads = tuple(sorted(draw(st.sets(st.sampled_from(vs[:i]), max_size=3))))
        edges.append(_task(draw, f"t{len(edges)}", reads, writes))
        i += width
    return Hypergraph.of(edges)


POOL = [VarId(x) for x in "abcde"]


@st.composite
def modules(draw, tag: str, outputs=None, inputs=None, max_states=1):
    """A bool module over the shared name pool.

    An output of rank ``r`` reads only pool names of lower rank, so modules
    built this way always compose without cycles.
    """
    rank = {v: k for k, v in enumerate(POOL)}
    if outputs is None:
        outputs = draw(st.sets(st.sampled_from(POOL), min_size=1, max_size=2))
    outputs = sorted(outputs)
    if inputs is None:
        free = [v for v in POOL if v not in outputs]
        inputs = draw(st.sets(st.sampled_from(free), max_size=2)) if free else set()
    inputs = sorted(inputs)
    states = [VarId(f"{tag}.s{k}") for k in range(draw(st.integers(0, max_states)))]
    edges = []
    for o in outputs:
        low = [v for v in inputs if rank[v] < rank[o]] + states
        edges.append(_task(draw, f"{tag}.{o.name}", tuple(sorted(draw(st.sets(st.sampled_from(low), max_size=2)))) if low else (), (o,)))
    for s in states:
        src = inputs + outputs + states
        edges.append(_task(draw, f"{tag}.{s.name}'", tuple(sorted(draw(st.sets(st.sampled_from(src), max_size=2)))), (s.primed,)))
    g = Hypergraph.of(edges)
    ins = frozenset(inputs) & g.vertices
    init = {s: draw(st.booleans()) for s in states}
    return Module(ins, frozenset(outputs), frozenset(states), init, g, tag)


@st.composite
def compatible_pairs(draw):
    m1 = draw(modules("m1"))
    rest = [v for v in POOL if v not in m1.outputs]
    o2 = draw(st.sets(st.sampled_from(rest), min_size=1, max_size=2))
    m2 = draw(modules("m2", outputs=o2))
    return m1, m2


@st.composite
def compatible_triples(draw):
    m1, m2 = draw(compatible_pairs())
    rest = [v for v in POOL if v not in m1.outputs | m2.outputs]
    o3 = draw(st.sets(st.sampled_from(rest), min_size=1, max_size=1)) if rest else set()
    m3 = draw(modules("m3", outputs=o3)) if o3 else Module(frozenset(), frozenset(), frozenset(), {},
                                                            Hypergraph.of([]), "m3")
    return m1, m2, m3


@st.composite
def obligations(draw):
    """A module with one bool and one int state and a random invariant contract."""
    b, n = VarId("b"), VarId("n", INT)
    x, y, z = VarId("x"), VarId("y"), VarId("z", INT)
    s, c = VarId("s"), VarId("c", INT)
    step = draw(st.sampled_from([0, 1, -1]))
    cmp = draw(st.sampled_from(["<=", ">=", "<", ">", "="]))
    edges = [
        _task(draw, "x", (b, s), (x,)),
        Task("z", (c, n), (z,), FunctionalAssign((app("ite", var(b), app("+", var(c), var(n)), var(c)),))),
        _task(draw, "y", tuple(sorted({x, s})), (y,)),
        Task("s'", (x, y), (s.primed,), FunctionalAssign((bool_expr(draw, [x, y]),))),
        Task("c'", (z,), (c.primed,), FunctionalAssign((app("+", var(z), const(step)),))),
    ]
    m = Module(frozenset({b, n}), frozenset({x, y, z}), frozenset({s, c}),
               {s: draw(st.booleans()), c: draw(st.integers(-1, 1))}, Hypergraph.of(edges), "rand")
    bound = draw(st.integers(-2, 3))
    assume = [Always(app(draw(st.sampled_from(["<=", ">=", "="])), var(n), const(draw(st.integers(-1, 1)))))] \
        if draw(st.booleans()) else []
    guarantee = [Always(app("or", bool_expr(draw, [x, y]), app(cmp, var(z), const(bound))))]
    return m, Contract(assume, guarantee)
