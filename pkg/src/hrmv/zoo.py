"""Small hand-built modules used by tests, scripts and documentation.

The counter reads a bool and an int, echoes the bool, and outputs the running
sum of the int; the delay feeds an int back one round later; the two-counter
system wires two counters into a loop whose only break is a top-level state.
"""

from __future__ import annotations

from .expr import BOOL, INT, TRUE, VarId, app, const, var
from .hierarchy import HierarchicalModule, SubmoduleBinding, leaf
from .hypergraph import FunctionalAssign, Hypergraph, NondetChoose, Task
from .modules import Always, Contract, Module


def V(name: str, sort=BOOL) -> VarId:
    return VarId(name, sort)


def copy(eid: str, src: VarId, *dst: VarId) -> Task:
    return Task(eid, (src,), dst, FunctionalAssign(tuple(var(src) for _ in dst)))


def counter(prefix: str = "", edge_prefix: str = "") -> Module:
    """Inputs ``i1:bool, i2:int``; ``o1 = i1``, ``o2 = i2 + s1``, ``s1' = o2``, ``s1`` starts at 0."""
    p = prefix
    i1, i2, o1, o2 = V(f"i{p}1"), V(f"i{p}2", INT), V(f"o{p}1"), V(f"o{p}2", INT)
    s1, l1 = V(f"s{p}1", INT), V(f"l{p}1", INT)
    ep = edge_prefix
    edges = [
        copy(f"{ep}e1", i1, o1),
        Task(f"{ep}e2", (i2, s1), (l1,), FunctionalAssign((app("+", var(i2), var(s1)),))),
        copy(f"{ep}e3", l1, o2, s1.primed),
    ]
    return Module({i1, i2}, {o1, o2}, {s1}, {s1: 0}, Hypergraph.of(edges), "counter")


def delay(src: VarId, dst: VarId, state: VarId | None = None, init=0) -> Module:
    """``dst`` is ``src`` from the previous round (``init`` in the first)."""
    sd = state or VarId(f"{dst.name}.d", src.sort)
    edges = [copy(f"d1:{dst.name}", sd, dst), copy(f"d2:{dst.name}", src, sd.primed)]
    return Module({src}, {dst}, {sd}, {sd: init}, Hypergraph.of(edges), "delay")


def counter_with_delay() -> tuple[Module, Module]:
    """The counter and a delay feeding ``o2`` back into ``i2``."""
    return counter(), delay(V("o2", INT), V("i2", INT), V("sd", INT))


def nonneg_contract(i: VarId, o: VarId) -> Contract:
    return Contract([Always(app(">=", var(i), const(0)))], [Always(app(">=", var(o), const(0)))])


def cyclic_abstraction_graph() -> Hypergraph:
    """A graph whose two-edge subgraph {e4, e5} turns into a cyclic edge when abstracted."""
    i1, i2, o1, o2 = V("i1"), V("i2", INT), V("o1"), V("o2", INT)
    s1, l1, l2 = V("s1", INT), V("l1", INT), V("l2", INT)
    return Hypergraph.of([
        copy("e1", i1, o1),
        Task("e2", (l1, s1), (l2,), FunctionalAssign((app("+", var(l1), var(s1)),))),
        copy("e3", l2, s1.primed),
        copy("e4", i2, l1),
        copy("e5", l2, o2),
    ])


# -- two counters in a loop ----------------------------------------------------

def _counter_in(j: int) -> Module:
    i1, i2, o1, o2 = V(f"i{j}.1"), V(f"i{j}.2", INT), V(f"o{j}.1"), V(f"o{j}.2", INT)
    s, l = V(f"s{j}.1", INT), V(f"l{j}.1", INT)
    edges = [
        copy(f"c{j}.e1", i1, o1),
        Task(f"c{j}.e2", (i2, s), (l,), FunctionalAssign((app("+", var(i2), var(s)),))),
        copy(f"c{j}.e3", l, o2, s.primed),
    ]
    return Module({i1, i2}, {o1, o2}, {s}, {s: 0}, Hypergraph.of(edges), f"counter{j}")


def two_counters() -> HierarchicalModule:
    """Top input ``i1:int``, output ``o1:int``, state ``s1:bool`` (initially true).

    Counter 1 reads ``s1 and o2.2 >= 0`` and ``o2.2``; counter 2 reads ``o1.1`` and
    ``i1``; ``s1`` latches ``o2.1`` and ``o1`` copies ``o1.2``.
    """
    c1, c2 = _counter_in(1), _counter_in(2)
    i1, o1, s1 = V("i1", INT), V("o1", INT), V("s1")
    o11, o12, o21, o22 = V("o1.1"), V("o1.2", INT), V("o2.1"), V("o2.2", INT)
    i11, i12, i21, i22 = V("i1.1"), V("i1.2", INT), V("i2.1"), V("i2.2", INT)
    wiring = [
        Task("a1", (s1, o22), (i11,), FunctionalAssign((app("and", var(s1), app(">=", var(o22), const(0))),))),
        copy("a2", o22, i12),
        copy("a3", o11, i21),
        copy("a4", i1, i22),
        copy("a5", o21, s1.primed),
        copy("a6", o12, o1),
    ]
    react = Hypergraph.of([*c1.react.edges, *c2.react.edges, *wiring])
    states = {s1} | c1.states | c2.states
    init = {s1: True, **c1.init, **c2.init}
    top = Module({i1}, {o1}, states, init, react, "two_counters")
    contract = nonneg_contract(i1, o1)
    bindings = [SubmoduleBinding("counter1", leaf(c1, node="Counter"), c1.react.edge_ids),
                SubmoduleBinding("counter2", leaf(c2, node="Counter"), c2.react.edge_ids)]
    return HierarchicalModule(top, bindings, contract, "Top")


def phi_contracts() -> dict[str, Contract]:
    """Each counter: a non-negative int input yields a non-negative int output."""
    return {f"counter{j}": nonneg_contract(V(f"i{j}.2", INT), V(f"o{j}.2", INT)) for j in (1, 2)}


def psi_contracts() -> dict[str, Contract]:
    """Each counter: a true bool input and non-negative int input, likewise for outputs."""
    def psi(b: VarId, n: VarId) -> Always:
        return Always(app("and", var(b), app(">=", var(n), const(0))))
    return {f"counter{j}": Contract([psi(V(f"i{j}.1"), V(f"i{j}.2", INT))], [psi(V(f"o{j}.1"), V(f"o{j}.2", INT))])
            for j in (1, 2)}


def chaos(outputs, inputs=()) -> Module:
    """A module writing ``outputs`` arbitrarily each round."""
    outputs = tuple(sorted(outputs))
    t = Task("chaos", tuple(sorted(inputs)), outputs, NondetChoose(TRUE))
    return Module(frozenset(inputs), frozenset(outputs), frozenset(), {}, Hypergraph.of([t]), "chaos")
