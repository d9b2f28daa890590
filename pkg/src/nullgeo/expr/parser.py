"""Recursive-descent parser for the scalar-expression grammar.

Grammar (offsets in errors are 1-based columns)::

    expr     := term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := ('-'|'+') factor | power
    power    := atom ('^' exponent)?
    exponent := UINT | '(' '-'? UINT ('/' UINT)? ')'
    atom     := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'

``^`` binds tightest and its exponent must be an integer or rational literal,
so half-integer powers like ``x5^(1/2)`` parse while general ``x^y`` does not.
"""

from __future__ import annotations

import math
import re

from ..errors import ExprSyntaxError, UnknownSymbolError
from .nodes import UNARY_FUNCS, Add, Call, Coord, Div, Mul, Neg, Node, Num, Param, Pow, Sub

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)
_UINT_RE = re.compile(r"\d+$")


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []  # (kind, lexeme, 1-based pos)
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None or m.end() == pos:
                bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad + 1)
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.toks.append(("eof", "", len(text) + 1))
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def next(self) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok


class _Parser:
    def __init__(self, text: str, coords: dict[str, int], params: dict[str, int]):
        self.toks = _Tokens(text)
        self.coords = coords
        self.params = params

    def parse(self) -> Node:
        node = self.expr()
        kind, lex, pos = self.toks.peek()
        if kind != "eof":
            raise ExprSyntaxError(f"unexpected {lex!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, lex, _ = self.toks.peek()
            if kind == "op" and lex in "+-":
                self.toks.next()
                rhs = self.term()
                node = Add(node, rhs) if lex == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> Node:
        node = self.factor()
        while True:
            kind, lex, _ = self.toks.peek()
            if kind == "op" and lex in "*/":
                self.toks.next()
                rhs = self.factor()
                node = Mul(node, rhs) if lex == "*" else Div(node, rhs)
            else:
                return node

    def factor(self) -> Node:
        kind, lex, _ = self.toks.peek()
        if kind == "op" and lex in "+-":
            self.toks.next()
            arg = self.factor()
            return Neg(arg) if lex == "-" else arg
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, lex, _ = self.toks.peek()
        if kind == "op" and lex == "^":
            self.toks.next()
            num, den = self.exponent()
            return Pow(base, num, den)
        return base

    def exponent(self) -> tuple[int, int]:
        kind, lex, pos = self.toks.next()
        if kind == "num":
            if not _UINT_RE.match(lex):
                raise ExprSyntaxError("exponent must be an integer or rational literal", pos)
            return int(lex), 1
        if kind == "op" and lex == "(":
            sign = 1
            kind, lex, pos = self.toks.next()
            if kind == "op" and lex == "-":
                sign = -1
                kind, lex, pos = self.toks.next()
            if kind != "num" or not _UINT_RE.match(lex):
                raise ExprSyntaxError("expected integer in exponent", pos)
            num = sign * int(lex)
            den = 1
            kind, lex, pos = self.toks.next()
            if kind == "op" and lex == "/":
                kind, lex, pos = self.toks.next()
                if kind != "num" or not _UINT_RE.match(lex) or int(lex) == 0:
                    raise ExprSyntaxError("expected positive integer denominator", pos)
                den = int(lex)
                kind, lex, pos = self.toks.next()
            if not (kind == "op" and lex == ")"):
                raise ExprSyntaxError("expected ')' closing exponent", pos)
            g = math.gcd(abs(num), den) or 1
            return num // g, den // g
        raise ExprSyntaxError("expected exponent literal after '^'", pos)

    def atom(self) -> Node:
        kind, lex, pos = self.toks.next()
        if kind == "num":
            return Num(float(lex))
        if kind == "ident":
            nxt_kind, nxt_lex, _ = self.toks.peek()
            if nxt_kind == "op" and nxt_lex == "(":
                if lex not in UNARY_FUNCS:
                    raise UnknownSymbolError(lex, pos)
                self.toks.next()
                arg = self.expr()
                k2, l2, p2 = self.toks.next()
                if not (k2 == "op" and l2 == ")"):
                    raise ExprSyntaxError("expected ')' closing call", p2)
                return Call(lex, arg)
            if lex in self.coords:
                return Coord(lex, self.coords[lex])
            if lex in self.params:
                return Param(lex, self.params[lex])
            raise UnknownSymbolError(lex, pos)
        if kind == "op" and lex == "(":
            node = self.expr()
            k2, l2, p2 = self.toks.next()
            if not (k2 == "op" and l2 == ")"):
                raise ExprSyntaxError("expected ')'", p2)
            return node
        raise ExprSyntaxError(f"expected operand, found {lex!r}" if lex else "expected operand", pos)


def parse_node(text: str, coords: dict[str, int], params: dict[str, int]) -> Node:
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 1)
    return _Parser(text, coords, params).parse()
