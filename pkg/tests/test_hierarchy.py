import pytest

from hrmv.corpus import text
from hrmv.expr import INT, app, const, var
from hrmv.hierarchy import (HierarchicalModule, HierarchyError, SubmoduleBinding, abstract_all, abstract_submodule,
                            decompose, derive_adapter, flatten, gen_obligations, gen_obligations_recursive,
                            graph_clusters, hist_var, leaf, validate_hierarchy)
from hrmv.hypergraph import Opaque
from hrmv.lustre import elaborate_main, load
from hrmv.modules import Always, Contract, DomainBounds, compose, hide, traces, validate_module
from hrmv.zoo import V, counter, counter_with_delay, phi_contracts, psi_contracts, two_counters

SMALL = DomainBounds(int_lo=-2, int_hi=2)


def names(vs):
    return sorted(v.name for v in vs)


def test_two_counters_is_valid():
    h = two_counters()
    assert validate_hierarchy(h).ok
    assert validate_module(flatten(h)).ok


def test_adapter_interface_flips_child_interfaces():
    a = derive_adapter(two_counters())
    assert names(a.inputs) == ["i1", "o1.1", "o1.2", "o2.1", "o2.2"]
    assert names(a.outputs) == ["i1.1", "i1.2", "i2.1", "i2.2", "o1"]
    assert names(a.states) == ["s1"]
    assert validate_module(a).ok


def test_recomposition_matches_flat_module():
    h = two_counters()
    d = decompose(h)
    assert traces(flatten(h), 3, SMALL) == traces(d.recompose(), 3, SMALL)
    h2 = elaborate_main(load(text("counter_delay")))
    assert traces(flatten(h2), 3, SMALL) == traces(decompose(h2).recompose(), 3, SMALL)


def test_child_interface_must_be_internal():
    c, d = counter_with_delay()
    h = HierarchicalModule(compose(c, d), [SubmoduleBinding("counter", leaf(c), c.react.edge_ids)])
    assert "i" in validate_hierarchy(h).conditions()


def test_overlapping_bindings_are_rejected():
    c = counter()
    h = HierarchicalModule(c, [SubmoduleBinding("a", leaf(c), c.react.edge_ids),
                               SubmoduleBinding("b", leaf(c), c.react.edge_ids)])
    rep = validate_hierarchy(h)
    assert not rep.ok and "disjoint" in rep.conditions()
    with pytest.raises(HierarchyError):
        flatten(h)


def test_binding_must_match_child_graph():
    c = counter()
    h = HierarchicalModule(c, [SubmoduleBinding("a", leaf(c), {"e1"})])
    assert not validate_hierarchy(h).ok


def test_obligations_of_two_counters():
    obs = gen_obligations(two_counters(), subs=phi_contracts())
    assert [o.label for o in obs] == ["sub:counter1", "sub:counter2", "adapter"]
    adapter = obs[-1]
    assert len(adapter.contract.assume) == 1 + 2
    assert adapter.guarantee_count == 1 + 2
    assert adapter.to_json()["guarantee"][0] == "o1 >= 0"


def test_flat_module_yields_a_single_goal():
    c = counter()
    contract = Contract([Always(app(">=", var(V("i2", INT)), const(0)))],
                        [Always(app(">=", var(V("o2", INT)), const(0)))])
    (ob,) = gen_obligations(leaf(c, contract))
    assert ob.label == "goal" and ob.subject == c


def test_recursive_obligations_on_a_lustre_hierarchy():
    h = elaborate_main(load(text("mctrl")))
    obs = gen_obligations_recursive(h)
    assert [o.label for o in obs] == ["sub:Top0.Controller0", "sub:Top0.Motor0", "adapter:Top0"]
    assert sum(o.guarantee_count for o in obs) == 24


def test_abstraction_replaces_children_by_opaque_tasks():
    h = two_counters()
    a = abstract_all(h, psi_contracts())
    tasks = {e.id: e for e in a.react.edges}
    assert {"counter1.contract", "counter2.contract"} <= set(tasks)
    assert isinstance(tasks["counter1.contract"].relation, Opaque)
    assert hist_var("counter1") in a.states and a.init[hist_var("counter1")] is True
    assert not (set(_counter_states(h)) & a.states)
    assert a.react.find_cycle() is not None


def _counter_states(h):
    return [s for b in h.bindings for s in b.module.states]


def test_single_abstraction_keeps_other_child():
    h = two_counters()
    a = abstract_submodule(h, "counter1", phi_contracts()["counter1"])
    ids = {e.id for e in a.react.edges}
    assert "counter1.contract" in ids and "c2.e2" in ids


def test_abstraction_contract_must_use_child_interface():
    bad = Contract([], [Always(app(">=", var(V("o1", INT)), const(0)))])
    with pytest.raises(ValueError):
        abstract_all(two_counters(), {"counter1": bad})


def test_hiding_child_interface_recovers_top_interface():
    h = two_counters()
    d = decompose(h)
    r = d.recompose()
    assert r.inputs == flatten(h).inputs and r.outputs == flatten(h).outputs
    assert hide(compose(*d.children, d.adapter), d.hide_set).outputs == r.outputs


def test_graph_clusters_name_children():
    assert set(graph_clusters(two_counters())) == {"counter1", "counter2"}
