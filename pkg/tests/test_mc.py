import os
import threading
import time
from pathlib import Path

import pytest

from hrmv.corpus import nfilters, text
from hrmv.expr import INT, app, const, var
from hrmv.hierarchy import abstract_all, flatten
from hrmv.hypergraph import FunctionalAssign, Hypergraph, Task
from hrmv.lustre import elaborate_main, load
from hrmv.mc import (EncodeError, EngineConfig, EngineError, Falsified, SolverError, Unknown, Valid, bmc, check,
                     emit_smt, encode, kinduction, parse_model, replay, solver_command, strengthen)
from hrmv.mc.smtlib import ModelError, frames_from_model, parse_sexprs
from hrmv.mc.solver import Cancelled, Session
from hrmv.modules import Always, Contract, Module, top_module
from hrmv.zoo import V, counter, nonneg_contract, psi_contracts, phi_contracts, two_counters

GOLDEN = Path(__file__).parent / "golden"
I2, O2 = V("i2", INT), V("o2", INT)
FAST = EngineConfig(max_k=4, bmc_bound=4, memo=False)


def nonneg_goal():
    return encode(counter(), nonneg_contract(I2, O2), "counter")


def unassumed():
    return encode(counter(), Contract([], [Always(app(">=", var(O2), const(0)))]), "counter-free")


def filter_ts():
    h = elaborate_main(load(nfilters(2)), "Filter")
    return encode(flatten(h), h.contract, "Filter")


def golden_cases():
    psi = abstract_all(two_counters(), psi_contracts())
    return {
        "counter_bmc_k1": emit_smt(nonneg_goal(), 1, "bmc"),
        "counter_step_k2": emit_smt(nonneg_goal(), 2, "step"),
        "top_bmc_k0": emit_smt(encode(top_module(), Contract(), "top"), 0, "bmc"),
        "filter_base_k0": emit_smt(filter_ts(), 0, "base"),
        "two_counters_psi_lemma": emit_smt(encode(psi, two_counters().contract, "psi"), 0, "lemma",
                                           encode(psi, two_counters().contract).candidates),
    }


def test_encode_counts():
    ts = nonneg_goal()
    assert len(ts.states) == 1 and len(ts.props) == 1 and len(ts.assumes) == 1
    assert ts.logic == "QF_LIA"
    top = encode(top_module(), Contract())
    assert top.frame_vars == () and top.trans == () and top.props == ()
    f = filter_ts()
    assert sorted(s.name for s in f.states) == ["Filter0.D1", "Filter0.D2"]
    assert len(f.props) == 2 and f.logic == "QF_LRA"


def test_encode_rejects_nonlinear_and_foreign_variables():
    x, y = V("x", INT), V("y", INT)
    sq = Module({x}, {y}, set(), {}, Hypergraph.of([Task("sq", (x,), (y,), FunctionalAssign((app("*", var(x), var(x)),)))]))
    with pytest.raises(EncodeError, match="nonlinear"):
        encode(sq, Contract())
    with pytest.raises(EncodeError, match="non-interface"):
        encode(counter(), Contract([], [Always(app(">=", var(V("zz", INT)), const(0)))]))


def test_scripts_unroll_k_plus_one_frames():
    s = emit_smt(nonneg_goal(), 1, "bmc")
    assert "|o2@1|" in s and "|o2@2|" not in s and "|s1@2|" in s
    step = emit_smt(nonneg_goal(), 2, "step")
    assert step.count("(assert (>= |o2@") == 2
    assert emit_smt(nonneg_goal(), 3, "bmc") == emit_smt(nonneg_goal(), 3, "bmc")
    with pytest.raises(ValueError):
        emit_smt(nonneg_goal(), 1, "pdr")


@pytest.mark.parametrize("name", sorted(golden_cases()))
def test_scripts_match_golden_files(name):
    got = golden_cases()[name]
    path = GOLDEN / f"{name}.smt2"
    if os.environ.get("HRMV_UPDATE_GOLDEN"):
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(got, encoding="utf-8")
    assert got == path.read_text(encoding="utf-8")


def test_model_parsing():
    model = parse_model('(\n  (define-fun |a@0| () Bool true)\n  (define-fun |n@1| () Int (- 3))\n'
                        '  (define-fun |r@0| () Real (/ 1.0 4.0))\n  (define-fun |q@0| () Real (- (/ 3.0 2.0))))')
    assert model == {"a@0": True, "n@1": -3, "r@0": 0.25, "q@0": -1.5}
    assert parse_sexprs("(a (b |c d|))") == [["a", ["b", "|c d|"]]]
    with pytest.raises(ModelError):
        parse_sexprs("(a")


def test_bmc_finds_shortest_counterexample():
    r = bmc(unassumed(), FAST)
    assert isinstance(r, Falsified) and r.k == 0
    (i, o), = r.trace
    assert dict(o)[O2] < 0


def test_bmc_alone_never_proves():
    r = bmc(nonneg_goal(), FAST)
    assert isinstance(r, Unknown)


def test_kinduction_proves_the_nonneg_goal():
    r = kinduction(nonneg_goal(), FAST)
    assert isinstance(r, Valid) and r.k == 1 and r.method == "k-induction"


def test_kinduction_reports_base_failures_as_unknown():
    r = kinduction(unassumed(), FAST)
    assert isinstance(r, Unknown) and "base" in r.reason


def test_trivial_goal_is_valid():
    assert isinstance(check(encode(top_module(), Contract()), FAST), Valid)
    assert isinstance(check(encode(counter(), Contract([], [Always(const(True))])), FAST), Valid)


def test_zero_budget_is_unknown():
    r = check(nonneg_goal(), EngineConfig(budget_secs=0))
    assert isinstance(r, Unknown)


def test_portfolio_picks_the_conclusive_engine():
    assert isinstance(check(nonneg_goal(), FAST), Valid)
    r = check(unassumed(), FAST)
    assert isinstance(r, Falsified) and r.method == "bmc"


def test_abstraction_results():
    h = two_counters()
    phi = encode(abstract_all(h, phi_contracts()), h.contract, "phi")
    assert len(strengthen(phi, FAST)) == 2
    assert isinstance(check(phi, FAST), Valid)
    psi = check(encode(abstract_all(h, psi_contracts()), h.contract, "psi"), FAST)
    assert isinstance(psi, Falsified) and psi.k == 0
    frame = {v.name: x for v, x in psi.frames[0].items()}
    assert frame["i1.1"] is False and frame["i2.1"] is False


def test_replay_rejects_a_tampered_model():
    ts = unassumed()
    r = bmc(ts, FAST)
    frames = [dict(f) for f in r.frames]
    assert replay(ts, frames, r.k) == r.trace
    frames[0][O2] = 5
    with pytest.raises(EngineError):
        replay(ts, frames, r.k)


def test_replay_frames_default_missing_values():
    ts = nonneg_goal()
    frames = frames_from_model(ts, {}, 1)
    assert len(frames) == 3 and frames[0][O2] == 0


def test_memo_returns_the_same_result():
    cfg = EngineConfig(max_k=4, bmc_bound=4)
    first = check(nonneg_goal(), cfg)
    assert check(nonneg_goal(), cfg) is first


def test_dump_writes_scripts(tmp_path):
    check(nonneg_goal(), EngineConfig(max_k=2, bmc_bound=1, dump_dir=str(tmp_path), memo=False))
    dumped = sorted(p.name for p in tmp_path.iterdir())
    assert "counter.kind.step.k1.smt2" in dumped
    assert all(n.endswith(".smt2") for n in dumped)


def test_solver_command_resolution(monkeypatch):
    assert solver_command("z3")[1:] == ["-in", "-smt2"]
    monkeypatch.setenv("HRMV_SOLVER", "z3 -in -smt2 -T:5")
    assert solver_command()[-1] == "-T:5"
    with pytest.raises(SolverError):
        solver_command("no-such-solver-binary")


def test_malformed_solver_output_is_an_error():
    s = Session(["sh", "-c", "cat > /dev/null; echo nonsense"])
    with pytest.raises(SolverError):
        s.run("(check-sat)\n")


def test_stopping_a_session_kills_the_solver():
    s = Session(["sh", "-c", "cat > /dev/null; sleep 30; echo sat"])
    threading.Timer(0.3, s.stop).start()
    start = time.monotonic()
    with pytest.raises(Cancelled):
        s.run("(check-sat)\n")
    assert time.monotonic() - start < 5


def test_deadline_turns_into_unknown():
    s = Session(["sh", "-c", "cat > /dev/null; sleep 30; echo sat"], deadline=time.monotonic() + 0.3)
    assert s.run("(check-sat)\n").status == "unknown"
