"""Symbolic transition systems for contract obligations.

``encode(m, c)`` turns ``m ∥ assume ⊑ guarantee`` into: per-frame copies of
every unprimed vertex of ``m``'s graph, the initial constraint on states, one
relation per task (primed states refer to the next frame), the assumptions as
path constraints and the guarantees as invariant candidates.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..expr import BOOL, INT, REAL, Expr, conj, is_linear, to_text
from ..hypergraph import CycleError, Opaque
from ..modules import Contract, Module


class EncodeError(Exception):
    pass


@dataclass(frozen=True)
class TransitionSystem:
    name: str
    module: Module
    frame_vars: tuple        # every per-frame variable, sorted by name
    states: tuple
    init: tuple              # (state, value) pairs
    trans: tuple             # (label, Expr) over frame vars and primed states
    assumes: tuple           # (label, Expr) over frame vars
    props: tuple             # (label, Expr) over frame vars
    candidates: tuple = ()   # boolean states proposed as invariants (history bits)

    @property
    def prop(self) -> Expr:
        return conj(p for _, p in self.props)

    @property
    def logic(self) -> str:
        sorts = {v.sort for v in self.frame_vars}
        if INT in sorts and REAL in sorts:
            return "QF_LIRA"
        return "QF_LRA" if REAL in sorts else "QF_LIA"

    def fingerprint(self) -> str:
        return repr((self.frame_vars, self.init, self.trans, self.assumes, self.props, self.candidates))

    def summary(self) -> dict:
        return {"name": self.name, "states": len(self.states), "vars": len(self.frame_vars),
                "tasks": len(self.trans), "assumes": len(self.assumes), "props": len(self.props)}


def _check_linear(label: str, e: Expr) -> None:
    if not is_linear(e):
        raise EncodeError(f"{label}: nonlinear arithmetic is not supported: {to_text(e)}")


def encode(m: Module, c: Contract | None = None, name: str = "") -> TransitionSystem:
    c = c or Contract()
    for f in (*c.assume, *c.guarantee):
        if f.kind != "always":
            raise EncodeError("contract formulas must be invariants; history properties belong in the module")
        stray = f.vars - m.inputs - m.outputs
        if stray:
            raise EncodeError(f"contract mentions non-interface variables: {', '.join(sorted(v.name for v in stray))}")
    g = m.react
    try:
        tasks = g.task_order()
    except CycleError:
        tasks = list(g.edges)
    primed = {s.primed for s in m.states}
    frame = set(m.inputs | m.outputs | m.states)
    frame |= {v for v in g.vertices if v not in primed}
    trans = []
    candidates = []
    for t in tasks:
        f = t.formula()
        _check_linear(t.id, f)
        trans.append((t.id, f))
        if isinstance(t.relation, Opaque) and t.relation.hist is not None:
            candidates.append(t.relation.hist)
    assumes = [(f.label or f.text(), f.p) for f in c.assume]
    props = [(f.label or f.text(), f.p) for f in c.guarantee]
    for label, e in (*assumes, *props):
        _check_linear(label, e)
    for s in m.states:
        if s in m.init and s.sort is BOOL and not isinstance(m.init[s], bool):
            raise EncodeError(f"initial value of {s.name} is not a bool")
    return TransitionSystem(
        name or m.name or "system", m, tuple(sorted(frame)), tuple(sorted(m.states)),
        tuple(sorted(m.init.items(), key=lambda kv: kv[0].name)), tuple(trans), tuple(assumes), tuple(props),
        tuple(sorted(v for v in candidates if m.init.get(v) is True)))
