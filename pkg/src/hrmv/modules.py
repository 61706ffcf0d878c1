"""Reactive modules over task graphs and their finite-domain semantics.

A module is ``(I, O, S, Init, React)`` where ``React`` is a task graph reading
``S`` and ``I`` and writing ``O`` and the primed copies ``S'``.  Executions are
enumerated exactly over bounded domains; this is the reference oracle that the
SMT engine is checked against, sound only up to the chosen depth and bounds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .expr import (BOOL, INT, REAL, TRUE, UNIT, Expr, ExprError, Sort, Value, VarId, conj,
                   evaluate, format_value, free_vars, parse_value, to_text)
from .hypergraph import (FunctionalAssign, GraphError, Hypergraph, NondetChoose, Opaque, Task,
                         ValidationReport, WriteConflict, await_dep, union, validate_tg)

Valuation = tuple  # sorted tuple of (VarId, value) pairs
Round = tuple      # (input valuation, output valuation)
Trace = tuple      # tuple of rounds


def valuation(d: Mapping[VarId, Value]) -> Valuation:
    return tuple(sorted(d.items(), key=lambda kv: kv[0].name))


class CompositionError(Exception):
    pass


class IncompatibleOutputs(CompositionError):
    def __init__(self, vs):
        self.vars = sorted(vs)
        super().__init__("outputs written by both modules: " + ", ".join(v.name for v in self.vars))


class IncompatibleStates(CompositionError):
    def __init__(self, vs):
        self.vars = sorted(vs)
        super().__init__("state variables shared or reused: " + ", ".join(v.name for v in self.vars))


class CyclicComposition(CompositionError):
    def __init__(self, cycle):
        self.cycle = cycle
        super().__init__("composition has a combinational cycle: " + " -> ".join(v.name for v in cycle))


class OracleError(Exception):
    pass


class StateExplosion(OracleError):
    pass


@dataclass(frozen=True)
class Module:
    inputs: frozenset = frozenset()
    outputs: frozenset = frozenset()
    states: frozenset = frozenset()
    init: Mapping = field(default_factory=dict)
    react: Hypergraph = field(default_factory=Hypergraph)
    name: str = ""

    def __post_init__(self):
        for f in ("inputs", "outputs", "states"):
            object.__setattr__(self, f, frozenset(getattr(self, f)))
        object.__setattr__(self, "init", dict(self.init))

    @property
    def primed_states(self) -> frozenset:
        return frozenset(s.primed for s in self.states)

    @property
    def locals(self) -> frozenset:
        return self.react.vertices - self.inputs - self.outputs - self.states - self.primed_states

    @property
    def interface(self) -> frozenset:
        return self.inputs | self.outputs

    def renamed(self, name: str) -> Module:
        return Module(self.inputs, self.outputs, self.states, self.init, self.react, name)


def validate_module(m: Module) -> ValidationReport:
    rep = ValidationReport()
    for a, b, what in ((m.inputs, m.outputs, "inputs/outputs"), (m.inputs, m.states, "inputs/states"),
                       (m.outputs, m.states, "outputs/states")):
        if a & b:
            rep.add("disjoint", f"{what} overlap: " + ", ".join(sorted(v.name for v in a & b)), sorted(a & b))
    g = m.react
    written = {w for e in g.edges for w in e.writes}
    read = {r for e in g.edges for r in e.reads}
    for s in sorted(m.states):
        if s in written:
            rep.add("state", f"state {s.name} is written within a round", [s])
        if s.primed in read:
            rep.add("state", f"next state {s.primed.name} is read within a round", [s.primed])
        if s.primed not in written:
            rep.add("state", f"next state {s.primed.name} is never written", [s.primed])
    for i in sorted(m.inputs & written):
        rep.add("input", f"input {i.name} is written by a task", [i])
    for o in sorted(m.outputs - written):
        rep.add("output", f"output {o.name} is never written", [o])
    for v in sorted(m.init):
        if v not in m.states:
            rep.add("init", f"init constrains non-state {v.name}", [v])
    rep.extend(validate_tg(g), "tg:")
    return rep


# -- properties and contracts ---------------------------------------------------

@dataclass(frozen=True)
class PropertyFormula:
    """``always`` p, or ``hist``: Hist(p) implies q."""
    kind: str
    p: Expr
    q: Expr | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("always", "hist"):
            raise ValueError(f"unknown property kind {self.kind!r}")
        for e in (self.p, self.q):
            if e is not None and e.sort is not BOOL:
                raise ExprError(f"property must be boolean, got {e.sort}")
        if self.kind == "hist" and self.q is None:
            raise ValueError("hist property needs a consequent")

    @property
    def vars(self) -> frozenset:
        return free_vars(self.p) | (free_vars(self.q) if self.q is not None else frozenset())

    def text(self) -> str:
        if self.kind == "always":
            return to_text(self.p)
        return f"Hist({to_text(self.p)}) => {to_text(self.q)}"


def Always(p: Expr, label: str = "") -> PropertyFormula:
    return PropertyFormula("always", p, None, label)


def HistImplies(p: Expr, q: Expr, label: str = "") -> PropertyFormula:
    return PropertyFormula("hist", p, q, label)


def property_module(f: PropertyFormula, vars: Iterable[VarId] | None = None) -> Module:
    """Module that nondeterministically outputs values satisfying ``f``.

    ``vars`` are the outputs (default: every variable of an ``always`` formula,
    the consequent's variables of a ``hist`` one); other variables become inputs.
    """
    text = f.text()
    if f.kind == "always":
        outs = frozenset(vars) if vars is not None else free_vars(f.p)
        ins = free_vars(f.p) - outs
        if not outs and not ins:
            if evaluate(f.p, {}) is not True:
                raise ExprError(f"unsatisfiable property {text}")
            return Module(name=f"□({text})")
        task = Task(f"prop[{text}]", tuple(sorted(ins)), tuple(sorted(outs)), NondetChoose(f.p))
        return Module(ins, outs, frozenset(), {}, Hypergraph.of([task]), f"□({text})")
    outs = frozenset(vars) if vars is not None else free_vars(f.q)
    ins = f.vars - outs
    h = VarId(f"hist[{to_text(f.p)}]", BOOL)
    task = Task(f"prop[{text}]", (*sorted(ins), h), (*sorted(outs), h.primed),
                Opaque(text, f.p, f.q, h))
    return Module(ins, outs, {h}, {h: True}, Hypergraph.of([task]), text)


@dataclass(frozen=True)
class Contract:
    """Assume/guarantee property lists; the sides are read as conjunctions."""
    assume: tuple = ()
    guarantee: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "assume", tuple(self.assume))
        object.__setattr__(self, "guarantee", tuple(self.guarantee))

    def assume_module(self, vars: Iterable[VarId] | None = None) -> Module:
        return _side_module(self.assume, vars)

    def guarantee_module(self, vars: Iterable[VarId] | None = None) -> Module:
        return _side_module(self.guarantee, vars)

    @property
    def vars(self) -> frozenset:
        out = frozenset()
        for f in (*self.assume, *self.guarantee):
            out |= f.vars
        return out


def _side_module(props: Sequence[PropertyFormula], vars) -> Module:
    if not props:
        return top_module()
    if any(f.kind != "always" for f in props):
        return compose(*(property_module(f) for f in props))
    return property_module(Always(conj(f.p for f in props)), vars)


# -- algebra --------------------------------------------------------------------

def top_module() -> Module:
    return Module(name="⊤")


def parallel_compose(m1: Module, m2: Module) -> Module:
    both_out = m1.outputs & m2.outputs
    if both_out:
        raise IncompatibleOutputs(both_out)
    clash = (m1.states & (m2.states | m2.interface | m2.locals)) | (m2.states & (m1.interface | m1.locals))
    if clash:
        raise IncompatibleStates(clash)
    try:
        g, acyclic = union(m1.react, m2.react)
    except WriteConflict as exc:
        raise IncompatibleOutputs(exc.vertices) from None
    except GraphError as exc:
        raise CompositionError(str(exc)) from None
    if not acyclic:
        raise CyclicComposition(g.find_cycle())
    outs = m1.outputs | m2.outputs
    name = " ∥ ".join(n for n in (m1.name, m2.name) if n and n != "⊤")
    return Module((m1.inputs | m2.inputs) - outs, outs, m1.states | m2.states,
                  {**m1.init, **m2.init}, g, name)


def compose(*ms: Module) -> Module:
    out = top_module()
    for m in ms:
        out = parallel_compose(out, m)
    return out


def hide(m: Module, vs: Iterable[VarId]) -> Module:
    vs = frozenset(vs)
    if not vs <= m.outputs:
        raise ValueError("can only hide outputs: " + ", ".join(sorted(v.name for v in vs - m.outputs)))
    return Module(m.inputs, m.outputs - vs, m.states, m.init, m.react, m.name)


# -- finite-domain oracle -------------------------------------------------------

@dataclass(frozen=True)
class DomainBounds:
    """Finite value sets for enumeration.

    Ints range over ``[int_lo, int_hi]``; any computed int outside the range
    discards the branch.  Reals are only enumerated for inputs (from
    ``reals``); nondeterministic real writes are rejected.
    """
    int_lo: int = -4
    int_hi: int = 4
    reals: tuple = (Fraction(-1), Fraction(0), Fraction(1))
    max_nodes: int = 2_000_000

    def domain(self, sort: Sort, *, for_input: bool = False) -> list:
        if sort is BOOL:
            return [False, True]
        if sort is INT:
            return list(range(self.int_lo, self.int_hi + 1))
        if sort is UNIT:
            return [()]
        if for_input:
            return [Fraction(r) for r in self.reals]
        raise OracleError("real-valued nondeterminism is not enumerable")

    def in_range(self, v: VarId, x: Value) -> bool:
        return v.sort is not INT or self.int_lo <= x <= self.int_hi


def _domain(v: VarId, bounds: DomainBounds | None, for_input=False) -> list:
    if bounds is None:
        if v.sort is BOOL:
            return [False, True]
        if v.sort is UNIT:
            return [()]
        raise OracleError(f"unbounded nondeterminism over {v.name} : {v.sort}")
    return bounds.domain(v.sort, for_input=for_input)


def _task_solutions(t: Task, env: dict, bounds: DomainBounds | None) -> Iterator[dict]:
    rel = t.relation
    if isinstance(rel, FunctionalAssign):
        out = {}
        for w, x in zip(t.writes, rel.exprs):
            val = evaluate(x, env)
            if bounds is not None and not bounds.in_range(w, val):
                return
            if w in env and env[w] != val:
                return
            out[w] = val
        yield out
        return
    unknown = [w for w in t.writes if w not in env]
    doms = [_domain(w, bounds) for w in unknown]
    for combo in itertools.product(*doms):
        cand = dict(zip(unknown, combo))
        if t.holds({**env, **cand}):
            yield cand


def solve_round(g: Hypergraph, env: Mapping[VarId, Value], bounds: DomainBounds | None = None) -> Iterator[dict]:
    """All full valuations of ``g`` extending ``env``.

    Tasks fire in id order once their reads are known.  If none is ready (a
    cyclic graph) the smallest unknown read is enumerated and later checked
    against its writer.
    """
    def go(env: dict, pending: tuple) -> Iterator[dict]:
        if not pending:
            yield env
            return
        for k, t in enumerate(pending):
            if all(r in env for r in t.reads):
                rest = pending[:k] + pending[k + 1:]
                for sol in _task_solutions(t, env, bounds):
                    yield from go({**env, **sol}, rest)
                return
        guess = min(r for t in pending for r in t.reads if r not in env)
        for x in _domain(guess, bounds):
            yield from go({**env, guess: x}, pending)

    yield from go(dict(env), g.edges)


def step(m: Module, state: Mapping[VarId, Value], inputs: Mapping[VarId, Value],
         bounds: DomainBounds | None = None, fixed: Mapping[VarId, Value] | None = None) -> set:
    """All ``(outputs, next_state)`` valuation pairs of one reaction.

    ``fixed`` pins further variables (outputs, locals, or primed states), which
    is how observed traces and counterexamples are replayed.
    """
    env = {**state, **inputs, **(fixed or {})}
    out = set()
    for sol in solve_round(m.react, env, bounds):
        o = {v: sol[v] for v in m.outputs if v in sol}
        if len(o) != len(m.outputs):
            missing = sorted(v.name for v in m.outputs if v not in sol)
            raise OracleError("outputs not determined: " + ", ".join(missing))
        nxt = {s: sol[s.primed] for s in m.states}
        out.add((valuation(o), valuation(nxt)))
    return out


def initial_states(m: Module, bounds: DomainBounds | None = None) -> list[Valuation]:
    choices = []
    for s in sorted(m.states):
        choices.append([m.init[s]] if s in m.init else _domain(s, bounds))
    states = sorted(m.states)
    return [valuation(dict(zip(states, combo))) for combo in itertools.product(*choices)]


def input_valuations(vs: Iterable[VarId], bounds: DomainBounds) -> list[Valuation]:
    vs = sorted(vs)
    doms = [_domain(v, bounds, for_input=True) for v in vs]
    return [valuation(dict(zip(vs, combo))) for combo in itertools.product(*doms)]


class _Stepper:
    """Memoised reactions of one module under fixed bounds."""

    def __init__(self, m: Module, bounds: DomainBounds | None):
        self.m, self.bounds, self.cache = m, bounds, {}
        self.nodes = 0

    def __call__(self, s: Valuation, i: Valuation, fixed: Valuation = ()) -> set:
        key = (s, i, fixed)
        if key not in self.cache:
            self.nodes += 1
            if self.bounds is not None and self.nodes > self.bounds.max_nodes:
                raise StateExplosion(f"more than {self.bounds.max_nodes} reactions explored")
            self.cache[key] = step(self.m, dict(s), dict(i), self.bounds, dict(fixed))
        return self.cache[key]


def traces(m: Module, depth: int, bounds: DomainBounds | None = None) -> frozenset:
    """All ``depth``-round traces reachable from some initial state."""
    bounds = bounds or DomainBounds()
    if depth == 0:
        return frozenset([()])
    stepper = _Stepper(m, bounds)
    ins = input_valuations(m.inputs, bounds)
    result: set = set()
    frontier = {(s, ()) for s in initial_states(m, bounds)}
    for _ in range(depth):
        nxt = set()
        for s, prefix in frontier:
            for i in ins:
                for o, s2 in stepper(s, i):
                    nxt.add((s2, prefix + ((i, o),)))
        frontier = nxt
        if len(frontier) > bounds.max_nodes:
            raise StateExplosion(f"more than {bounds.max_nodes} partial traces")
    for _, t in frontier:
        result.add(t)
    return frozenset(result)


def project(t: Trace, vs: Iterable[VarId]) -> Trace:
    vs = set(vs)
    return tuple((tuple(p for p in i if p[0] in vs), tuple(p for p in o if p[0] in vs)) for i, o in t)


def project_traces(ts: Iterable[Trace], vs: Iterable[VarId]) -> frozenset:
    vs = set(vs)
    return frozenset(project(t, vs) for t in ts)


def check_static_impl(m1: Module, m2: Module) -> ValidationReport:
    rep = ValidationReport()
    if not m2.outputs <= m1.outputs:
        miss = sorted(m2.outputs - m1.outputs)
        rep.add("i", "outputs not produced by the implementation: " + ", ".join(v.name for v in miss), miss)
    if not m2.inputs <= m1.inputs | m1.outputs:
        miss = sorted(m2.inputs - m1.inputs - m1.outputs)
        rep.add("ii", "inputs unknown to the implementation: " + ", ".join(v.name for v in miss), miss)
    g1, g2 = m1.react, m2.react
    for y in sorted(m2.outputs):
        for x in sorted(m2.inputs | m2.outputs):
            if x in g2.vertices and y in g2.vertices and await_dep(g2, x, y):
                kept = x in g1.vertices and y in g1.vertices and await_dep(g1, x, y)
                if not kept:
                    rep.add("iii", f"dependency of {y.name} on {x.name} is not preserved", [y, x])
    return rep


def find_refinement_violation(m1: Module, m2: Module, depth: int,
                              bounds: DomainBounds | None = None) -> Trace | None:
    """A trace of ``m1`` (up to ``depth`` rounds) whose projection ``m2`` cannot produce."""
    bounds = bounds or DomainBounds()
    rep = check_static_impl(m1, m2)
    if {"i", "ii"} & rep.conditions():
        raise ValueError(f"interfaces do not match:\n{rep}")
    step1, step2 = _Stepper(m1, bounds), _Stepper(m2, None)
    ins = input_valuations(m1.inputs, bounds)
    i2, o2 = m2.inputs, m2.outputs
    seen = set()

    def explore(s1, s2set, prefix, left):
        if left == 0:
            return None
        key = (s1, s2set, left)
        if key in seen:
            return None
        seen.add(key)
        for i in ins:
            for o, n1 in step1(s1, i):
                full = dict(i) | dict(o)
                pi = valuation({v: full[v] for v in i2})
                po = valuation({v: full[v] for v in o2})
                nxt = set()
                for s2 in s2set:
                    for _, n2 in step2(s2, pi, po):
                        nxt.add(n2)
                t = prefix + ((i, o),)
                if not nxt:
                    return t
                found = explore(n1, frozenset(nxt), t, left - 1)
                if found is not None:
                    return found
        return None

    inits2 = frozenset(initial_states(m2, bounds))
    for s1 in initial_states(m1, bounds):
        found = explore(s1, inits2, (), depth)
        if found is not None:
            return found
    return None


def bounded_refines(m1: Module, m2: Module, depth: int, bounds: DomainBounds | None = None) -> bool:
    """Every trace of ``m1`` up to ``depth`` rounds projects onto a trace of ``m2``.

    Exact over the bounded domains; says nothing beyond the depth.
    """
    return find_refinement_violation(m1, m2, depth, bounds) is None


def find_contract_violation(m: Module, c: Contract, depth: int,
                            bounds: DomainBounds | None = None) -> Trace | None:
    """A trace of ``m`` within ``depth`` rounds that meets every assumption
    in every round but breaks a guarantee in its last round.

    Contract formulas must be invariants over the interface of ``m``.
    """
    bounds = bounds or DomainBounds()
    for f in (*c.assume, *c.guarantee):
        if f.kind != "always":
            raise OracleError("contract formulas must be invariants")
    stepper = _Stepper(m, bounds)
    ins = input_valuations(m.inputs, bounds)
    seen = set()

    def explore(s, prefix, left):
        if left == 0 or (s, left) in seen:
            return None
        seen.add((s, left))
        for i in ins:
            for o, n in sorted(stepper(s, i), key=repr):
                env = dict(i) | dict(o)
                if not all(evaluate(f.p, env) for f in c.assume):
                    continue
                t = prefix + ((i, o),)
                if not all(evaluate(f.p, env) for f in c.guarantee):
                    return t
                found = explore(n, t, left - 1)
                if found is not None:
                    return found
        return None

    for s0 in initial_states(m, bounds):
        found = explore(s0, (), depth)
        if found is not None:
            return found
    return None


def bounded_equivalent(m1: Module, m2: Module, depth: int, bounds: DomainBounds | None = None) -> bool:
    return m1.inputs == m2.inputs and m1.outputs == m2.outputs and \
        traces(m1, depth, bounds) == traces(m2, depth, bounds)


# -- simulation and text format --------------------------------------------------

@dataclass(frozen=True)
class Reaction:
    state: Valuation
    inputs: Valuation
    outputs: Valuation
    next_state: Valuation


def simulate(m: Module, rounds: Sequence[Mapping[VarId, Value]], bounds: DomainBounds | None = None) -> list:
    """Run ``m`` on the given input rounds, taking the first successor when nondeterministic."""
    inits = initial_states(m, bounds)
    if not inits:
        raise OracleError("no initial state")
    s = inits[0]
    out = []
    for r in rounds:
        i = valuation({v: r[v] for v in m.inputs})
        succ = sorted(step(m, dict(s), dict(i), bounds), key=repr)
        if not succ:
            raise OracleError(f"no reaction in round {len(out)}")
        o, s2 = succ[0]
        out.append(Reaction(s, i, o, s2))
        s = s2
    return out


def format_round(*vals: Valuation) -> str:
    items = sorted((p for v in vals for p in v), key=lambda kv: kv[0].name)
    return " ".join(f"{v.name}={format_value(x)}" for v, x in items)


def format_trace(t: Trace) -> str:
    return "".join(format_round(i, o) + "\n" for i, o in t)


def format_traces(ts: Iterable[Trace]) -> str:
    return "\n".join(format_trace(t) for t in sorted(ts, key=format_trace))


def parse_round(line: str, vars: Iterable[VarId]) -> dict:
    by_name = {v.name: v for v in vars}
    out = {}
    for item in line.split():
        name, _, text = item.partition("=")
        if name not in by_name:
            raise ValueError(f"unknown variable {name!r}")
        v = by_name[name]
        out[v] = parse_value(text, v.sort)
    return out
