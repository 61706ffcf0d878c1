import json
import subprocess
import sys

import pytest

from hrmv.cli import SCHEMA_VERSION, main, run_check, run_compose
from hrmv.corpus import path, text
from hrmv.lustre import load
from hrmv.mc import EngineConfig

FAST = ["--max-k", "4", "--bmc-bound", "4"]


def lus(tmp_path, name, body):
    p = tmp_path / name
    p.write_text(body, encoding="utf-8")
    return str(p)


def test_check_counter_is_valid(capsys):
    assert main(["check", str(path("counter"))]) == 0
    assert "VALID" in capsys.readouterr().err


def test_input_errors_exit_3(tmp_path, capsys):
    assert main(["check", str(tmp_path / "missing.lus")]) == 3
    assert main(["check", str(path("counter")), "--main", "Nope"]) == 3
    bad = lus(tmp_path, "bad.lus", "node N (x : int) returns (y : int); let y = ; tel")
    assert main(["check", bad]) == 3
    flat = lus(tmp_path, "flat.lus", "node N (x : int) returns (y : int); let y = x; tel")
    assert main(["check", flat]) == 3
    assert "no contract" in capsys.readouterr().err
    assert main(["check", str(path("counter")), "--solver", "no-such-solver"]) == 3


def test_falsified_check_exits_1(tmp_path):
    src = text("counter").replace("  assume i2 >= 0;\n", "")
    assert main(["check", lus(tmp_path, "c.lus", src), *FAST]) == 1


def test_json_report(tmp_path):
    out = tmp_path / "r.json"
    assert main(["abstract", str(path("two_counters_psi")), "--json", str(out)]) == 1
    r = json.loads(out.read_text())
    assert r["schema_version"] == SCHEMA_VERSION and r["mode"] == "abstract"
    (ob,) = r["obligations"]
    assert ob["verdict"] == "falsified" and ob["note"] == "possibly spurious (abstraction)"
    assert ob["frames"][0]["Counter0.i1"] == "false" and ob["frames"][0]["Counter1.i1"] == "false"
    assert set(ob["trace"][0]) == {"i1", "o1"}


def test_abstract_on_flat_program_matches_check(tmp_path):
    a, c = tmp_path / "a.json", tmp_path / "c.json"
    main(["abstract", str(path("counter")), "--json", str(a)])
    main(["check", str(path("counter")), "--json", str(c)])
    ja, jc = json.loads(a.read_text()), json.loads(c.read_text())
    assert ja["verdict"] == jc["verdict"] == "valid"
    assert ja["obligations"][0]["k"] == jc["obligations"][0]["k"]


def test_compose_reports_counts_and_dedup(tmp_path):
    out = tmp_path / "r.json"
    assert main(["compose", str(path("two_counters_psi")), "--json", str(out)]) == 0
    r = json.loads(out.read_text())
    assert r["guarantees"] == 4
    assert r["dedup"]["Counter"] == {"instances": ["Top0.Counter0", "Top0.Counter1"], "solver_checked": 1}
    assert [o["kind"] for o in r["obligations"]] == ["node", "adapter"]


def test_no_dedup_checks_every_instance_with_the_same_verdict():
    tp = load(text("two_counters_psi"))
    cfg = EngineConfig(max_k=4, bmc_bound=4)
    a = run_compose(tp, None, cfg)
    b = run_compose(tp, None, cfg, dedup=False)
    assert a.verdict == b.verdict == "valid"
    assert len(b.obligations) == 3
    assert b.extra["dedup"]["Counter"]["solver_checked"] == 2
    assert a.extra["guarantees"] == b.extra["guarantees"]


@pytest.mark.parametrize("name", ["counter_delay", "two_counters_phi", "two_counters_psi", "mctrl"])
def test_compose_valid_means_monolithic_is_not_falsified(name):
    tp = load(text(name))
    cfg = EngineConfig(max_k=6, bmc_bound=6, budget_secs=30)
    assert run_compose(tp, None, cfg).verdict == "valid"
    assert run_check(tp, None, cfg).verdict != "falsified"


def test_modular_skips_nodes_without_contracts(tmp_path, capsys):
    src = text("counter") + "\nnode Top (a : int) returns (b : int);\nvar x : bool;\nlet x, b = Counter(true, a); tel\n"
    assert main(["modular", lus(tmp_path, "m.lus", src)]) == 0
    err = capsys.readouterr().err
    assert "Top: skipped (no contract)" in err and "Counter: VALID" in err


def test_decompose_writes_program_and_manifest(tmp_path):
    out = tmp_path / "d.lus"
    assert main(["decompose", str(path("two_counters_psi")), "-o", str(out)]) == 0
    d = load(out.read_text())
    assert not d.program.node("Top").calls()
    manifest = json.loads(out.with_suffix(".manifest.json").read_text())
    assert manifest["schema_version"] == SCHEMA_VERSION
    assert manifest["nodes"]["Top"]["kind"] == "adapter"


def test_decompose_copies_flat_files(tmp_path):
    out = tmp_path / "c.lus"
    assert main(["decompose", str(path("counter")), "-o", str(out)]) == 0
    assert out.read_text() == text("counter")


def test_decomposed_program_checks_modularly(tmp_path):
    out = tmp_path / "d.lus"
    main(["decompose", str(path("two_counters_psi")), "-o", str(out)])
    j = tmp_path / "r.json"
    assert main(["modular", str(out), "--json", str(j)]) == 0
    assert [o["node"] for o in json.loads(j.read_text())["obligations"]] == ["Counter", "Top"]


def test_simulate_counter(tmp_path, capsys):
    inputs = lus(tmp_path, "in.txt", "i1=true i2=1\ni1=false i2=0\n# comment\ni1=true i2=2\n")
    assert main(["simulate", str(path("counter")), "--inputs", inputs]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["0: i1=true i2=1 -> o1=true o2=1", "1: i1=false i2=0 -> o1=false o2=1",
                     "2: i1=true i2=2 -> o1=true o2=3"]
    assert main(["simulate", str(path("counter")), "--inputs", inputs, "--depth", "0"]) == 0
    assert capsys.readouterr().out == ""


def test_simulate_input_errors(tmp_path):
    bad = lus(tmp_path, "in.txt", "i1=true\n")
    assert main(["simulate", str(path("counter")), "--inputs", bad]) == 3
    ok = lus(tmp_path, "ok.txt", "i1=true i2=1\n")
    assert main(["simulate", str(path("counter")), "--inputs", ok, "--depth", "2"]) == 3


def test_graph_has_clusters_per_child(capsys):
    assert main(["graph", str(path("two_counters_psi"))]) == 0
    dot = capsys.readouterr().out
    assert dot.startswith('digraph "Top" {')
    assert dot.count("subgraph") == 2 and '"cluster_Top0.Counter0"' in dot
    assert main(["graph", str(path("two_counters_psi")), "--node", "Counter"]) == 0
    assert "subgraph" not in capsys.readouterr().out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "hrmv", "check", str(path("counter"))], capture_output=True, text=True)
    assert r.returncode == 0 and "verdict: VALID" in r.stderr
