"""BMC, k-induction and the portfolio driver.

BMC refutes: it searches frames ``0..bound`` for the shortest violation.
k-induction proves: for ``k = 1, 2, ...`` it needs the base case (no
violation within ``k`` frames) and the inductive step (``k`` good frames
cannot be followed by a bad one).  Before the induction loop, boolean history
states introduced by abstraction are offered as invariant lemmas and the
inductive subset is kept.  Every counterexample is replayed through the
module's own reaction relation before it is reported.
"""

from __future__ import annotations

import queue
import re
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..expr import evaluate
from ..modules import Contract, Module, Trace, step, valuation
from .smtlib import emit_smt, frames_from_model, parse_model
from .solver import Cancelled, Session, solver_command
from .ts import TransitionSystem, encode


class EngineError(Exception):
    pass


@dataclass(frozen=True)
class EngineConfig:
    solver: str | None = None
    max_k: int = 32
    bmc_bound: int = 20
    budget_secs: float = 600.0
    dump_dir: str | None = None
    strengthen: bool = True
    memo: bool = True


@dataclass(frozen=True)
class Valid:
    method: str   # "k-induction"
    k: int
    lemmas: tuple = ()
    seconds: float = 0.0
    verdict = "valid"


@dataclass(frozen=True)
class Falsified:
    trace: Trace
    k: int
    frames: tuple = field(default=(), repr=False)
    method: str = "bmc"
    seconds: float = 0.0
    verdict = "falsified"


@dataclass(frozen=True)
class Unknown:
    reason: str
    bound: int = 0
    seconds: float = 0.0
    verdict = "unknown"


CheckResult = Valid | Falsified | Unknown


class _Run:
    """Solver access plus optional script dumping for one engine invocation."""

    def __init__(self, ts: TransitionSystem, cfg: EngineConfig, session: Session, tag: str):
        self.ts, self.cfg, self.session, self.tag = ts, cfg, session, tag

    def query(self, k: int, kind: str, lemmas=()):
        script = emit_smt(self.ts, k, kind, lemmas)
        if self.cfg.dump_dir:
            d = Path(self.cfg.dump_dir)
            d.mkdir(parents=True, exist_ok=True)
            safe = re.sub(r"[^A-Za-z0-9_.-]", "_", self.ts.name)
            (d / f"{safe}.{self.tag}.{kind}.k{k}.smt2").write_text(script, encoding="utf-8")
        return self.session.run(script)


_ACTIVE: set = set()
_ACTIVE_LOCK = threading.Lock()


def _session(cfg: EngineConfig) -> Session:
    return Session(solver_command(cfg.solver), time.monotonic() + cfg.budget_secs)


def cancel_all() -> None:
    """Stop every running portfolio and kill its solver processes."""
    with _ACTIVE_LOCK:
        sessions = list(_ACTIVE)
    for s in sessions:
        s.stop()


def replay(ts: TransitionSystem, frames: list[dict], k: int) -> Trace:
    """Check a solver model against the module semantics and return its trace.

    Raises :class:`EngineError` if the model is not an execution of the module
    that satisfies the assumptions and violates the property at frame ``k``.
    """
    m = ts.module
    for s, v in ts.init:
        if frames[0][s] != v:
            raise EngineError(f"counterexample starts outside the initial states ({s.name})")
    rounds = []
    for i in range(k + 1):
        f = frames[i]
        state = {s: f[s] for s in m.states}
        inputs = {v: f[v] for v in m.inputs}
        fixed = {v: x for v, x in f.items() if v not in m.states and v not in m.inputs}
        fixed.update({s.primed: frames[i + 1][s] for s in m.states})
        if not step(m, state, inputs, None, fixed):
            raise EngineError(f"counterexample frame {i} is not a reaction of {m.name}")
        for label, a in ts.assumes:
            if not evaluate(a, f):
                raise EngineError(f"counterexample breaks assumption {label} at frame {i}")
        rounds.append((valuation(inputs), valuation({v: f[v] for v in m.outputs})))
    if evaluate(ts.prop, frames[k]):
        raise EngineError("counterexample does not violate the property")
    return tuple(rounds)


def _falsified(run: _Run, ans, k: int, method: str, start: float) -> Falsified:
    frames = frames_from_model(run.ts, parse_model(ans.model), k)
    trace = replay(run.ts, frames, k)
    return Falsified(trace, k, tuple(frames), method, time.monotonic() - start)


def bmc(ts: TransitionSystem, cfg: EngineConfig = EngineConfig(), session: Session | None = None):
    session = session or _session(cfg)
    run = _Run(ts, cfg, session, "bmc")
    start = time.monotonic()
    for k in range(cfg.bmc_bound + 1):
        ans = run.query(k, "bmc")
        if ans.status == "sat":
            return _falsified(run, ans, k, "bmc", start)
        if ans.status != "unsat":
            return Unknown("solver gave up or budget exhausted", k, time.monotonic() - start)
    return Unknown(f"no counterexample up to depth {cfg.bmc_bound}", cfg.bmc_bound, time.monotonic() - start)


def strengthen(ts: TransitionSystem, cfg: EngineConfig = EngineConfig(), session: Session | None = None) -> tuple:
    """Largest inductive subset of the history-bit candidates (under the assumptions)."""
    session = session or _session(cfg)
    run = _Run(ts, cfg, session, "lemma")
    cands = list(ts.candidates)
    while cands:
        ans = run.query(0, "lemma", cands)
        if ans.status == "unsat":
            break
        if ans.status != "sat":
            return ()
        model = parse_model(ans.model)
        kept = [v for v in cands if model.get(f"{v.name}@1", True) is True]
        if len(kept) == len(cands):
            raise EngineError("lemma query returned a model that breaks no lemma")
        cands = kept
    return tuple(cands)


def kinduction(ts: TransitionSystem, cfg: EngineConfig = EngineConfig(), session: Session | None = None):
    session = session or _session(cfg)
    start = time.monotonic()
    lemmas = strengthen(ts, cfg, session) if cfg.strengthen and ts.candidates else ()
    run = _Run(ts, cfg, session, "kind")
    for k in range(1, cfg.max_k + 1):
        base = run.query(k - 1, "base")
        if base.status == "sat":
            return Unknown(f"base case fails at depth {k - 1}", k - 1, time.monotonic() - start)
        if base.status != "unsat":
            return Unknown("solver gave up or budget exhausted", k - 1, time.monotonic() - start)
        ind = run.query(k, "step", lemmas)
        if ind.status == "unsat":
            return Valid("k-induction", k, tuple(v.name for v in lemmas), time.monotonic() - start)
        if ind.status != "sat":
            return Unknown("solver gave up or budget exhausted", k, time.monotonic() - start)
    return Unknown(f"not {cfg.max_k}-inductive", cfg.max_k, time.monotonic() - start)


_MEMO: dict = {}
_MEMO_LOCK = threading.Lock()


def _memo_key(ts: TransitionSystem, cfg: EngineConfig) -> tuple:
    return (ts.fingerprint(), solver_command(cfg.solver)[0], cfg.max_k, cfg.bmc_bound, cfg.strengthen)


def check(ts: TransitionSystem, cfg: EngineConfig = EngineConfig()):
    """Run BMC and k-induction side by side; the first conclusive answer wins."""
    if cfg.budget_secs <= 0:
        return Unknown("budget exhausted", 0)
    key = _memo_key(ts, cfg) if cfg.memo and not cfg.dump_dir else None
    if key is not None:
        with _MEMO_LOCK:
            if key in _MEMO:
                return _MEMO[key]
    start = time.monotonic()
    session = _session(cfg)
    with _ACTIVE_LOCK:
        _ACTIVE.add(session)
    try:
        final = _portfolio(ts, cfg, session)
    finally:
        with _ACTIVE_LOCK:
            _ACTIVE.discard(session)
    final = replace(final, seconds=time.monotonic() - start)
    if key is not None and not isinstance(final, Unknown):
        with _MEMO_LOCK:
            _MEMO[key] = final
    return final


def _portfolio(ts: TransitionSystem, cfg: EngineConfig, session: Session):
    results: queue.Queue = queue.Queue()

    def worker(fn):
        try:
            results.put(fn(ts, cfg, session))
        except Cancelled:
            results.put(None)
        except Exception as exc:  # surfaced to the caller below
            results.put(exc)

    threads = [threading.Thread(target=worker, args=(fn,), daemon=True) for fn in (bmc, kinduction)]
    for t in threads:
        t.start()
    final, unknowns, error = None, [], None
    for _ in threads:
        r = results.get()
        if isinstance(r, Exception):
            error = error or r
            session.stop()
            continue
        if isinstance(r, (Valid, Falsified)):
            final = r
            session.stop()
            break
        if r is not None:
            unknowns.append(r)
    for t in threads:
        t.join()
    if final is None and error is not None:
        raise error
    if final is None:
        reasons = "; ".join(u.reason for u in unknowns) or "cancelled"
        final = Unknown(reasons, max((u.bound for u in unknowns), default=0))
    return final


def check_obligation(m: Module, c: Contract, cfg: EngineConfig = EngineConfig(), name: str = ""):
    return check(encode(m, c, name), cfg)
