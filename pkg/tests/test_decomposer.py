import pytest

from hrmv.corpus import nfilters, text
from hrmv.decomposer import DecomposeError, decompose_program
from hrmv.hierarchy import derive_adapter, gen_obligations_recursive
from hrmv.lustre import elaborate_main, load, parse, pretty_print, typecheck
from hrmv.lustre.printer import expr_text


def adapter_decl(src, node):
    return decompose_program(load(src)).program.node(node)


def test_two_counter_adapter_interface():
    top = adapter_decl(text("two_counters_psi"), "Top")
    assert [p.name for p in top.inputs] == ["i1", "Counter0_o1", "Counter0_o2", "Counter1_o1", "Counter1_o2"]
    assert [p.name for p in top.outputs] == ["o1", "Counter0_i1", "Counter0_i2", "Counter1_i1", "Counter1_i2"]
    assert not top.calls()


def test_adapter_contract_swaps_child_sides():
    top = adapter_decl(text("two_counters_psi"), "Top")
    assumes = [expr_text(a) for a in top.contract.assumes]
    guarantees = [expr_text(g) for g in top.contract.guarantees]
    assert assumes == ["i1 >= 0", "Counter0_o1 and Counter0_o2 >= 0", "Counter1_o1 and Counter1_o2 >= 0"]
    assert guarantees == ["o1 >= 0", "Counter0_i1 and Counter0_i2 >= 0", "Counter1_i1 and Counter1_i2 >= 0"]


def test_leaf_nodes_pass_through():
    tp = load(text("two_counters_psi"))
    d = decompose_program(tp)
    assert d.program.node("Counter") == tp.program.node("Counter")
    assert set(d.adapters) == {"Top"}


def test_flat_program_is_unchanged():
    tp = load(text("counter"))
    d = decompose_program(tp)
    assert d.program == tp.program and d.adapters == {}


def test_source_and_module_adapters_agree():
    tp = load(nfilters(2))
    d = decompose_program(tp)
    dtp = typecheck(d.program)
    src_adapter = elaborate_main(dtp, "Toplevel").module
    mod_adapter = derive_adapter(elaborate_main(tp))
    strip = lambda vs: sorted(v.name.split(".", 1)[1].replace(".", "_") for v in vs)  # noqa: E731
    assert strip(src_adapter.inputs) == strip(mod_adapter.inputs)
    assert strip(src_adapter.outputs) == strip(mod_adapter.outputs)
    assert len(src_adapter.states) == len(mod_adapter.states) == 1


@pytest.mark.parametrize("name, expected", [("filters2", 7), ("filters3", 9), ("filters36", 75), ("mctrl", 24)])
def test_guarantee_counts_agree_between_source_and_modules(name, expected):
    tp = load(text(name))
    d = decompose_program(tp)
    per_node = {n.name: len(n.contract.guarantees) for n in d.program.nodes if n.contract}
    assert sum(per_node.values()) == expected
    obs = gen_obligations_recursive(elaborate_main(tp))
    by_node = {o.node: o.guarantee_count for o in obs}
    assert sum(by_node.values()) == expected


def test_promoted_name_clash_is_reported():
    src = text("counter") + """
node Top (a : int) returns (b : int; Counter0_o2 : int);
var x : bool;
let
  x, b = Counter(true, a);
  Counter0_o2 = 0;
tel
"""
    with pytest.raises(DecomposeError):
        decompose_program(load(src))


def test_manifest_lists_every_instance():
    tp = load(nfilters(3))
    m = decompose_program(tp).manifest(tp)
    kinds = [(o["instance"], o["kind"]) for o in m["obligations"]]
    assert kinds[0] == ("Toplevel0", "adapter")
    assert [k for _, k in kinds[1:]] == ["node"] * 3
    assert m["nodes"]["Toplevel"]["promoted_inputs"]["Filter0_out1"] == "Filter0.out1"


def test_decomposed_program_prints_and_reparses():
    d = decompose_program(load(text("mctrl"))).program
    assert parse(pretty_print(d)) == d
