"""Command-line front end: ``hrmv <command> FILE.lus [options]``.

Verification commands print a human report on stderr and can write a JSON
report with ``--json``.  Exit codes: 0 valid, 1 falsified, 2 unknown,
3 usage or input error, 4 internal engine error (a counterexample that does
not replay), 130 interrupted.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .expr import VarId, format_value
from .hierarchy import HierarchyError, abstract_all, flatten, graph_clusters
from .hypergraph import to_dot
from .lustre import LustreError, TypedProgram, elaborate, elaborate_main, instantiate, load_file, typecheck
from .lustre.printer import pretty_print
from .decomposer import decompose_program
from .mc import (EncodeError, EngineConfig, EngineError, Falsified, SolverError, Valid, cancel_all, check, encode,
                 solver_command)
from .modules import Contract, Module, OracleError, parse_round, simulate

SCHEMA_VERSION = 1
EXIT_VALID, EXIT_FALSIFIED, EXIT_UNKNOWN, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3, 4
SPURIOUS = "possibly spurious (abstraction)"


class InputError(Exception):
    pass


# -- reports -------------------------------------------------------------------------

def _short(name: str, prefix: str) -> str:
    return name[len(prefix):] if prefix and name.startswith(prefix) else name


def _frame_json(frame: dict, prefix: str) -> dict:
    return {_short(v.name, prefix): format_value(x) for v, x in sorted(frame.items())}


@dataclass
class ObligationReport:
    name: str
    node: str
    kind: str                     # "node" | "adapter" | "goal" | "abstraction"
    instances: tuple
    assumes: int
    guarantees: int
    result: object = None
    prefix: str = ""              # stripped from variable names in traces
    note: str = ""
    detail: frozenset = frozenset()   # internal variables worth showing in counterexamples

    @property
    def verdict(self) -> str:
        return self.result.verdict

    def to_json(self) -> dict:
        r = self.result
        out = {"name": self.name, "node": self.node, "kind": self.kind, "instances": list(self.instances),
               "assumes": self.assumes, "guarantees": self.guarantees, "verdict": r.verdict,
               "seconds": round(r.seconds, 3)}
        if isinstance(r, Valid):
            out.update(method=r.method, k=r.k, lemmas=list(r.lemmas))
        elif isinstance(r, Falsified):
            out.update(method=r.method, k=r.k,
                       trace=[_frame_json(dict(i) | dict(o), self.prefix) for i, o in r.trace],
                       frames=[_frame_json(f, self.prefix) for f in r.frames[:r.k + 1]])
        else:
            out.update(reason=r.reason, bound=r.bound)
        if self.note:
            out["note"] = self.note
        return out

    def text(self) -> str:
        r = self.result
        head = f"{self.name}: {r.verdict.upper()}"
        if isinstance(r, Valid):
            head += f" ({r.method}, k={r.k})"
        elif isinstance(r, Falsified):
            head += f" ({r.method}, counterexample of {r.k + 1} round(s))"
        else:
            head += f" ({r.reason})"
        head += f" [{self.guarantees} guarantee(s), {r.seconds:.2f}s]"
        lines = [head]
        if self.note:
            lines.append(f"  note: {self.note}")
        if isinstance(r, Falsified):
            for k, (i, o) in enumerate(r.trace):
                vals = " ".join(f"{n}={x}" for n, x in _frame_json(dict(i) | dict(o), self.prefix).items())
                lines.append(f"  round {k}: {vals}")
                inner = {v: x for v, x in r.frames[k].items() if v in self.detail}
                if inner:
                    vals = " ".join(f"{n}={x}" for n, x in _frame_json(inner, self.prefix).items())
                    lines.append(f"    inside: {vals}")
        return "\n".join(lines)


@dataclass
class Report:
    mode: str
    file: str
    main: str
    obligations: list = field(default_factory=list)
    seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        verdicts = [o.verdict for o in self.obligations]
        if "falsified" in verdicts:
            return "falsified"
        if all(v == "valid" for v in verdicts):
            return "valid"
        return "unknown"

    @property
    def exit_code(self) -> int:
        return {"valid": EXIT_VALID, "falsified": EXIT_FALSIFIED}.get(self.verdict, EXIT_UNKNOWN)

    def to_json(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "mode": self.mode, "file": self.file, "main": self.main,
                "verdict": self.verdict, "seconds": round(self.seconds, 3),
                "obligations": [o.to_json() for o in self.obligations], **self.extra}

    def text(self) -> str:
        lines = [f"{self.mode} {self.file} (main {self.main})"]
        lines += [o.text() for o in self.obligations]
        for s in self.extra.get("skipped", []):
            lines.append(f"{s}: skipped (no contract)")
        if "guarantees" in self.extra:
            lines.append(f"guarantees: {self.extra['guarantees']}")
        lines.append(f"verdict: {self.verdict.upper()} ({self.seconds:.2f}s)")
        return "\n".join(lines)


# -- commands ------------------------------------------------------------------------

def _obligation(name, node, kind, instances, m: Module, c: Contract, cfg: EngineConfig,
                prefix: str = "", note: str = "") -> ObligationReport:
    ob = ObligationReport(name, node, kind, tuple(instances), len(c.assume), len(c.guarantee),
                          prefix=prefix, note=note)
    ob.result = check(encode(m, c, name), cfg)
    if isinstance(ob.result, Falsified) and kind == "abstraction":
        ob.note = SPURIOUS
    return ob


def _contract(tp: TypedProgram, node: str):
    h = elaborate_main(tp, node)
    if h.contract is None:
        raise InputError(f"node {node} has no contract")
    return h


def run_check(tp: TypedProgram, main: str | None, cfg: EngineConfig, file: str = "") -> Report:
    """Monolithic: the flattened main node against its own contract."""
    main = main or tp.last
    start = time.monotonic()
    h = _contract(tp, main)
    rep = Report("check", file, main)
    rep.obligations.append(_obligation(main, main, "goal", (h.name,), flatten(h), h.contract, cfg, h.name + "."))
    rep.seconds = time.monotonic() - start
    return rep


def run_modular(tp: TypedProgram, cfg: EngineConfig, file: str = "") -> Report:
    """Every node with a contract, each as its own flattened module."""
    start = time.monotonic()
    rep = Report("modular", file, tp.last, extra={"skipped": []})
    for node in tp.order:
        h = elaborate_main(tp, node)
        if h.contract is None:
            rep.extra["skipped"].append(node)
            continue
        rep.obligations.append(_obligation(node, node, "node", (h.name,), flatten(h), h.contract, cfg,
                                           h.name + "."))
    rep.seconds = time.monotonic() - start
    return rep


def run_abstract(tp: TypedProgram, main: str | None, cfg: EngineConfig, file: str = "") -> Report:
    """The main contract with every contracted child replaced by its contract."""
    main = main or tp.last
    start = time.monotonic()
    h = _contract(tp, main)
    contracts = {b.name: b.child.contract for b in h.bindings if b.child.contract is not None}
    m = abstract_all(h, contracts) if contracts else flatten(h)
    kind = "abstraction" if contracts else "goal"
    rep = Report("abstract", file, main, extra={"abstracted": sorted(contracts)})
    ob = _obligation(main, main, kind, (h.name,), m, h.contract, cfg, h.name + ".")
    ob.detail = frozenset().union(*(h.binding(n).module.inputs | h.binding(n).module.outputs for n in contracts))
    rep.obligations.append(ob)
    rep.seconds = time.monotonic() - start
    return rep


def run_compose(tp: TypedProgram, main: str | None, cfg: EngineConfig, file: str = "",
                dedup: bool = True, jobs: int | None = None) -> Report:
    """Decompose into adapter nodes and check one obligation per node (or per instance)."""
    main = main or tp.last
    start = time.monotonic()
    dp = decompose_program(tp, main)
    dtp = typecheck(dp.program)
    groups: dict[str, list[str]] = {}
    for inst in instantiate(tp, main).walk():
        groups.setdefault(inst.node, []).append(inst.path)
    nodes = [n for n in dtp.order if n in groups]       # callees first
    jobs_list, skipped, counts = [], [], {}
    for node in nodes:
        kind = "adapter" if node in dp.adapters else "node"
        paths = groups[node]
        for path in (paths[:1] if dedup else paths):
            h = elaborate(dtp, instantiate(dtp, node, path))
            if h.contract is None:
                skipped.append(node)
                break
            counts[node] = len(h.contract.guarantee)
            name = node if dedup else path
            jobs_list.append((name, node, kind, tuple(paths) if dedup else (path,), flatten(h), h.contract,
                              path + "."))
    workers = jobs or min(4, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_obligation, *j[:6], cfg, j[6]) for j in jobs_list]
        obligations = [f.result() for f in futures]
    checked = {}
    for j in jobs_list:
        checked[j[1]] = checked.get(j[1], 0) + 1
    dedup_info = {n: {"instances": groups[n], "solver_checked": checked.get(n, 0)} for n in nodes}
    rep = Report("compose", file, main, obligations,
                 extra={"guarantees": sum(counts.values()), "dedup": dedup_info, "dedup_enabled": dedup,
                        "skipped": sorted(set(skipped))})
    rep.seconds = time.monotonic() - start
    return rep


def run_decompose(tp: TypedProgram, main: str | None, source: Path, out: Path | None) -> tuple[Path, Path]:
    """Write the decomposed program and its manifest; a flat program is copied unchanged."""
    main = main or tp.last
    dp = decompose_program(tp, main)
    out = out or source.with_name(source.stem + ".decomposed.lus")
    manifest = out.with_suffix(".manifest.json")
    if dp.adapters:
        out.write_text(pretty_print(dp.program), encoding="utf-8")
    elif out.resolve() != source.resolve():
        shutil.copyfile(source, out)
    manifest.write_text(json.dumps({"schema_version": SCHEMA_VERSION, **dp.manifest(tp)}, indent=2) + "\n",
                        encoding="utf-8")
    return out, manifest


def read_inputs(text: str, m: Module, prefix: str) -> list[dict]:
    """One round per non-blank line of ``name=value`` pairs (unqualified names)."""
    vars_ = [VarId(_short(v.name, prefix), v.sort) for v in m.inputs]
    back = {_short(v.name, prefix): v for v in m.inputs}
    rounds = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            r = parse_round(line, vars_)
        except ValueError as exc:
            raise InputError(f"inputs line {n}: {exc}") from None
        missing = sorted(set(back) - {v.name for v in r})
        if missing:
            raise InputError(f"inputs line {n}: no value for {', '.join(missing)}")
        rounds.append({back[v.name]: x for v, x in r.items()})
    return rounds


def run_simulate(tp: TypedProgram, main: str | None, inputs: str, depth: int | None = None) -> str:
    main = main or tp.last
    h = elaborate_main(tp, main)
    m = flatten(h)
    prefix = h.name + "."
    rounds = read_inputs(inputs, m, prefix)
    if depth is not None:
        if depth > len(rounds):
            raise InputError(f"{depth} rounds requested but only {len(rounds)} input rounds given")
        rounds = rounds[:depth]
    lines = []
    for k, r in enumerate(simulate(m, rounds)):
        ins = " ".join(f"{n}={x}" for n, x in _frame_json(dict(r.inputs), prefix).items())
        outs = " ".join(f"{n}={x}" for n, x in _frame_json(dict(r.outputs), prefix).items())
        lines.append(f"{k}: {ins} -> {outs}")
    return "".join(line + "\n" for line in lines)


def run_graph(tp: TypedProgram, node: str | None) -> str:
    node = node or tp.last
    h = elaborate_main(tp, node)
    return to_dot(h.module.react, node, graph_clusters(h))


# -- argument handling ---------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hrmv", description="Assume-guarantee verification of hierarchical Lustre programs.")
    sub = p.add_subparsers(dest="command", required=True)

    def verify(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("file")
        s.add_argument("--main", help="main node (default: last node in the file)")
        s.add_argument("--solver", help="SMT solver command (default: $HRMV_SOLVER or z3)")
        s.add_argument("--max-k", type=int, default=EngineConfig.max_k)
        s.add_argument("--bmc-bound", type=int, default=EngineConfig.bmc_bound)
        s.add_argument("--budget-secs", type=float, default=EngineConfig.budget_secs)
        s.add_argument("--json", metavar="PATH", help="write the machine-readable report here")
        s.add_argument("--dump-smt", metavar="DIR", help="save every emitted SMT-LIB script")
        return s

    verify("check", "monolithic: flatten the main node and check its contract")
    verify("modular", "check every node with a contract on its own")
    verify("abstract", "check the main contract with children replaced by their contracts")
    c = verify("compose", "decompose into adapters and check every obligation")
    c.add_argument("--no-dedup", action="store_true", help="check every instance, not one per node")
    c.add_argument("--jobs", type=int, help="obligations checked in parallel")

    d = sub.add_parser("decompose", help="write the adapter-node program and a manifest")
    d.add_argument("file")
    d.add_argument("--main")
    d.add_argument("-o", "--output", help="output .lus path (default: FILE.decomposed.lus)")

    s = sub.add_parser("simulate", help="run the main node on concrete inputs")
    s.add_argument("file")
    s.add_argument("--main")
    s.add_argument("--inputs", required=True, help="file with one 'name=value ...' line per round, or -")
    s.add_argument("--depth", type=int, help="number of rounds (default: all input lines)")

    g = sub.add_parser("graph", help="print a node's task graph as DOT")
    g.add_argument("file")
    g.add_argument("--main", "--node", dest="main")
    return p


def _config(args) -> EngineConfig:
    return EngineConfig(solver=args.solver, max_k=args.max_k, bmc_bound=args.bmc_bound,
                        budget_secs=args.budget_secs, dump_dir=args.dump_smt)


def _load(path: str) -> TypedProgram:
    try:
        return load_file(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _dispatch(args) -> int:
    tp = _load(args.file)
    if args.main is not None and args.main not in tp.nodes:
        raise InputError(f"no node named {args.main!r}")
    cmd = args.command
    if cmd in ("check", "modular", "abstract", "compose"):
        cfg = _config(args)
        solver_command(cfg.solver)
        if cmd == "check":
            rep = run_check(tp, args.main, cfg, args.file)
        elif cmd == "modular":
            rep = run_modular(tp, cfg, args.file)
        elif cmd == "abstract":
            rep = run_abstract(tp, args.main, cfg, args.file)
        else:
            rep = run_compose(tp, args.main, cfg, args.file, dedup=not args.no_dedup, jobs=args.jobs)
        print(rep.text(), file=sys.stderr)
        if args.json:
            Path(args.json).write_text(json.dumps(rep.to_json(), indent=2) + "\n", encoding="utf-8")
        return rep.exit_code
    if cmd == "decompose":
        out, manifest = run_decompose(tp, args.main, Path(args.file), Path(args.output) if args.output else None)
        print(f"wrote {out} and {manifest}", file=sys.stderr)
        return 0
    if cmd == "simulate":
        if args.depth is not None and args.depth < 0:
            raise InputError("--depth must be non-negative")
        text = sys.stdin.read() if args.inputs == "-" else _read(args.inputs)
        sys.stdout.write(run_simulate(tp, args.main, text, args.depth))
        return 0
    sys.stdout.write(run_graph(tp, args.main))
    return 0


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _dispatch(args)
    except KeyboardInterrupt:
        cancel_all()
        print("interrupted", file=sys.stderr)
        return 130
    except (InputError, LustreError, HierarchyError, EncodeError, SolverError, OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EngineError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
