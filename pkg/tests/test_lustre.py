from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrmv.corpus import names, nfilters, text
from hrmv.decomposer import decompose_program
from hrmv.expr import INT, VarId
from hrmv.hierarchy import flatten, validate_hierarchy
from hrmv.lustre import (ElaborationError, LustreTypeError, ParseError, elaborate_main, instantiate, load, parse,
                         parse_expr, pretty_print, typecheck)
from hrmv.lustre.ast import Binary, Ident, Ite, Lit, Unary
from hrmv.lustre.lexer import tokenize
from hrmv.lustre.printer import expr_text
from hrmv.modules import simulate, validate_module

COUNTER = text("counter")


def node(body: str, params="(x : int) returns (y : int)") -> str:
    return f"node N {params};\n{body}"


def test_tokenizer_skips_comments_and_marks_contracts():
    toks = tokenize("-- line\n(* block *) x (*@contract guarantee x; *)")
    kinds = [t.kind for t in toks]
    assert kinds == ["IDENT", "CONTRACT", "KW", "IDENT", "SYM", "ENDCONTRACT", "EOF"]


def test_unterminated_contract_reports_its_start():
    with pytest.raises(ParseError) as exc:
        tokenize("node\n  (*@contract guarantee x;")
    assert exc.value.span.line == 2 and exc.value.span.col == 3


def test_parse_error_has_location_and_expectation():
    with pytest.raises(ParseError) as exc:
        parse("node N (x : int) returns (y : int);\nlet\n  y = x +;\ntel")
    assert exc.value.span.line == 3
    assert "3:" in str(exc.value)


def test_precedence():
    e = parse_expr("a or b and not c = d")
    assert isinstance(e, Binary) and e.op == "or"
    assert e.right.op == "and"
    assert isinstance(e.right.right, Binary) and e.right.right.op == "="
    assert isinstance(e.right.right.left, Unary) and e.right.right.left.op == "not"
    assert parse_expr("a => b => c") == parse_expr("a => (b => c)")
    assert parse_expr("0 -> pre x + 1") == Binary("->", Lit(0, "int"), Binary("+", Unary("pre", Ident("x")),
                                                                              Lit(1, "int")))
    with pytest.raises(ParseError):
        parse_expr("a < b < c")


def test_contract_may_follow_the_local_declarations():
    p = parse("node N (x : int) returns (y : int);\nvar z : int;\n(*@contract guarantee y = x; *)\n"
              "let z = x; y = z; tel")
    assert p.nodes[0].contract.guarantees[0] == parse_expr("y = x")


def test_corpus_round_trips():
    for name in names():
        p = parse(text(name))
        printed = pretty_print(p)
        assert parse(printed) == p
        assert pretty_print(parse(printed)) == printed


def test_decomposed_corpus_round_trips():
    for name in names():
        tp = load(text(name))
        d = decompose_program(tp).program
        printed = pretty_print(d)
        assert parse(printed) == d
        typecheck(parse(printed))


@pytest.mark.parametrize("src, fragment", [
    (node("let y = z; tel"), "unknown variable"),
    (node("let y = x; y = x; tel"), "defined twice"),
    (node("let tel"), "no defining equation"),
    (node("let x = 1; y = x; tel"), "cannot be defined"),
    (node("let y = x / 2; tel"), "integer division"),
    (node("let y = if x then 1 else 2; tel"), "condition must be bool"),
    (node("let y = x + 1.0; tel"), "numeric operands"),
    (node("(*@contract guarantee pre y > 0; *) let y = x; tel"), "'pre' is not allowed"),
    (node("let y = N(x) + 1; tel"), "whole right-hand side"),
    (node("let y = N(x); tel"), "recursive"),
    (node("var __z : int; let __z = x; y = __z; tel"), "reserved"),
])
def test_type_errors(src, fragment):
    with pytest.raises(LustreTypeError) as exc:
        load(src)
    assert fragment in str(exc.value)


def test_real_division_by_literal_is_allowed():
    load(node("let y = x / 1.25; tel", "(x : real) returns (y : real)"))
    with pytest.raises(LustreTypeError):
        load(node("let y = x / x; tel", "(x : real) returns (y : real)"))


def test_combinational_cycle_is_an_elaboration_error():
    tp = load(node("var a, b : int; let a = b; b = a; y = a; tel"))
    with pytest.raises(ElaborationError):
        elaborate_main(tp)


def test_instances_are_numbered_per_callee():
    tp = load(nfilters(3))
    inst = instantiate(tp)
    assert [n for n, _ in inst.children] == ["Filter0", "Filter1", "Filter2"]
    assert inst.path == "Toplevel0"


def test_elaborated_corpus_is_valid():
    for name in names():
        h = elaborate_main(load(text(name)))
        assert validate_hierarchy(h).ok, name
        assert validate_module(flatten(h)).ok, name


def test_counter_registers_and_outputs():
    h = elaborate_main(load(COUNTER))
    m = h.module
    assert {s.name for s in m.states} == {"Counter0.s1"}
    assert m.init[VarId("Counter0.s1", INT)] == 0
    assert [g.label for g in h.contract.guarantee] == ["o2 >= 0"]


def test_counter_simulation_from_source():
    h = elaborate_main(load(COUNTER))
    m = flatten(h)
    by = {v.name.split(".")[-1]: v for v in m.inputs | m.outputs}
    rounds = [{by["i1"]: True, by["i2"]: 1}, {by["i1"]: False, by["i2"]: 0}, {by["i1"]: True, by["i2"]: 2}]
    outs = [dict(r.outputs) for r in simulate(m, rounds)]
    assert [(o[by["o1"]], o[by["o2"]]) for o in outs] == [(True, 1), (False, 1), (True, 3)]


def _filter_by_hand(xs):
    """The filter recurrence evaluated directly with exact rationals."""
    d1 = d2 = Fraction(0)
    out = []
    for b, x in xs:
        s = Fraction("0.0582") * (x if b else -x) + Fraction("1.49") * d1 - Fraction("0.881") * d2
        out.append((b, (s - d2) / Fraction("1.25")))
        d1, d2 = s, d1
    return out


def test_filter_simulation_matches_the_recurrence():
    h = elaborate_main(load(nfilters(2)), "Filter")
    m = flatten(h)
    by = {v.name.split(".")[-1]: v for v in m.inputs | m.outputs}
    xs = [(True, Fraction(1, 2))] * 5
    rs = simulate(m, [{by["in1"]: b, by["in2"]: x} for b, x in xs])
    got = [(dict(r.outputs)[by["out1"]], dict(r.outputs)[by["out2"]]) for r in rs]
    assert got == _filter_by_hand(xs)
    assert got[0][1] == Fraction(291, 12500)


def test_general_arrow_uses_a_first_round_flag():
    tp = load(node("let y = if true -> false then x else 0; tel"))
    m = elaborate_main(tp).module
    assert any(s.name.endswith("__first") for s in m.states)
    rs = simulate(m, [{next(iter(m.inputs)): 5}] * 2)
    assert [list(dict(r.outputs).values())[0] for r in rs] == [5, 0]


def _exprs():
    leaves = st.one_of(st.sampled_from([Ident("a"), Ident("b"), Ident("c")]),
                       st.integers(0, 9).map(lambda n: Lit(n, "int")),
                       st.booleans().map(lambda b: Lit(b, "bool")),
                       st.sampled_from(["0.5", "1.25", "3.0"]).map(lambda s: Lit(Fraction(s), "real")))

    def grow(sub):
        return st.one_of(
            st.tuples(st.sampled_from(["not", "-", "pre"]), sub).map(lambda t: Unary(t[0], t[1])),
            st.tuples(st.sampled_from(["->", "=>", "or", "xor", "and", "=", "<>", "<", ">=", "+", "-", "*", "/"]),
                      sub, sub).map(lambda t: Binary(t[0], t[1], t[2])),
            st.tuples(sub, sub, sub).map(lambda t: Ite(*t)),
        )
    return st.recursive(leaves, grow, max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(_exprs())
def test_printed_expressions_parse_back(e):
    assert parse_expr(expr_text(e)) == e
