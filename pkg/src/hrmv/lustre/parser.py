"""Recursive-descent parser for the Lustre/CoCoSpec subset.

Operator precedence, loosest first::

    ->            right
    =>            right
    or xor        left
    and           left
    = <> < <= > >=   non-associative
    not           prefix
    + -           left
    * /           left
    - pre         prefix

``if c then a else b`` is a primary whose ``else`` branch extends as far as
possible.
"""

from __future__ import annotations

from .ast import (Binary, Call, ContractSpec, Equation, Ident, Ite, Lit, NodeDecl, Param, Program,
                  Unary)
from .lexer import ParseError, Token, tokenize

TYPES = ("bool", "int", "real")
CMP = ("=", "<>", "<", "<=", ">", ">=")


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers ----------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("KW", "SYM") and t.text in texts

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, *texts: str) -> Token:
        if not self.at(*texts):
            self.fail(texts)
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            self.fail((what,))
        return self.next()

    def fail(self, expected) -> None:
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        raise ParseError(f"unexpected {found}", t.span, tuple(expected))

    # -- declarations -------------------------------------------------------------

    def program(self) -> Program:
        nodes = []
        while self.tok.kind != "EOF":
            nodes.append(self.node())
        return Program(tuple(nodes))

    def node(self) -> NodeDecl:
        start = self.expect("node").span
        name = self.expect_kind("IDENT", "node name").text
        self.expect("(")
        inputs = self.params(")")
        self.expect(")")
        self.expect("returns")
        self.expect("(")
        outputs = self.params(")")
        self.expect(")")
        if self.at(";"):
            self.next()
        contract = self.contract() if self.tok.kind == "CONTRACT" else None
        locals_ = ()
        if self.at("var"):
            self.next()
            groups = []
            while self.tok.kind == "IDENT":
                groups.extend(self.group())
                self.expect(";")
            locals_ = tuple(groups)
        if contract is None and self.tok.kind == "CONTRACT":
            contract = self.contract()
        self.expect("let")
        eqs = []
        while not self.at("tel"):
            eqs.append(self.equation())
        self.expect("tel")
        if self.at(";"):
            self.next()
        return NodeDecl(name, inputs, outputs, contract, locals_, tuple(eqs), start)

    def params(self, close: str) -> tuple:
        out = []
        if self.at(close):
            return ()
        while True:
            out.extend(self.group())
            if self.at(";"):
                self.next()
                if self.at(close):
                    break
                continue
            break
        return tuple(out)

    def group(self) -> list[Param]:
        names = [self.expect_kind("IDENT", "identifier")]
        while self.at(","):
            self.next()
            names.append(self.expect_kind("IDENT", "identifier"))
        self.expect(":")
        ty = self.expect(*TYPES).text
        return [Param(t.text, ty, t.span) for t in names]

    def contract(self) -> ContractSpec:
        self.next()
        assumes, guarantees = [], []
        while self.tok.kind != "ENDCONTRACT":
            kw = self.expect("assume", "guarantee").text
            e = self.expr()
            self.expect(";")
            (assumes if kw == "assume" else guarantees).append(e)
        self.next()
        return ContractSpec(tuple(assumes), tuple(guarantees))

    def equation(self) -> Equation:
        start = self.tok.span
        paren = self.at("(")
        if paren:
            self.next()
        lhs = [self.expect_kind("IDENT", "identifier").text]
        while self.at(","):
            self.next()
            lhs.append(self.expect_kind("IDENT", "identifier").text)
        if paren:
            self.expect(")")
        self.expect("=")
        rhs = self.expr()
        self.expect(";")
        return Equation(tuple(lhs), rhs, start)

    # -- expressions --------------------------------------------------------------

    def expr(self):
        return self.arrow()

    def arrow(self):
        left = self.implies()
        if self.at("->"):
            span = self.next().span
            return Binary("->", left, self.arrow(), span)
        return left

    def implies(self):
        left = self.disj()
        if self.at("=>"):
            span = self.next().span
            return Binary("=>", left, self.implies(), span)
        return left

    def disj(self):
        left = self.conj()
        while self.at("or", "xor"):
            t = self.next()
            left = Binary(t.text, left, self.conj(), t.span)
        return left

    def conj(self):
        left = self.comparison()
        while self.at("and"):
            t = self.next()
            left = Binary("and", left, self.comparison(), t.span)
        return left

    def comparison(self):
        left = self.negation()
        if self.at(*CMP):
            t = self.next()
            left = Binary(t.text, left, self.negation(), t.span)
            if self.at(*CMP):
                raise ParseError("comparisons do not chain; add parentheses", self.tok.span)
        return left

    def negation(self):
        if self.at("not"):
            t = self.next()
            return Unary("not", self.negation(), t.span)
        return self.additive()

    def additive(self):
        left = self.term()
        while self.at("+", "-"):
            t = self.next()
            left = Binary(t.text, left, self.term(), t.span)
        return left

    def term(self):
        left = self.unary()
        while self.at("*", "/"):
            t = self.next()
            left = Binary(t.text, left, self.unary(), t.span)
        return left

    def unary(self):
        if self.at("-", "pre"):
            t = self.next()
            return Unary(t.text, self.unary(), t.span)
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "INT":
            self.next()
            return Lit(t.value, "int", t.span)
        if t.kind == "REAL":
            self.next()
            return Lit(t.value, "real", t.span)
        if self.at("true", "false"):
            self.next()
            return Lit(t.text == "true", "bool", t.span)
        if self.at("if"):
            self.next()
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            b = self.expr()
            return Ite(c, a, b, t.span)
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "IDENT":
            self.next()
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.next()
                        args.append(self.expr())
                self.expect(")")
                return Call(t.text, tuple(args), t.span)
            return Ident(t.text, t.span)
        self.fail(("expression",))


def parse(text: str) -> Program:
    return Parser(text).program()


def parse_expr(text: str):
    p = Parser(text)
    e = p.expr()
    if p.tok.kind != "EOF":
        p.fail(("end of expression",))
    return e
