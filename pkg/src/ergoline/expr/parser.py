"""Recursive descent parser for coefficient expressions.

Grammar (one variable, default ``x``)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := number | variable | ident '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than a leading minus, so
``-x^2`` is ``-(x^2)`` while ``2^-0.5`` is allowed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from ..errors import ExprSyntaxError, UnknownIdentifierError
from .nodes import FUNCTIONS, BinaryOp, Call, Negate, Node, Number, Variable

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "number", "ident", "op" or "eof"
    text: str
    offset: int


def tokenize(source: str) -> list[Token]:
    """Split source text into tokens with byte offsets."""
    tokens: list[Token] = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", _offset(source, pos))
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), _offset(source, pos)))
        pos = match.end()
    tokens.append(Token("eof", "", _offset(source, len(source))))
    return tokens


def _offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


class Parser:
    """Single-use recursive descent parser over a token list."""

    def __init__(self, source: str, variable: str = "x"):
        self.variable = variable
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        if self.current.text != text:
            found = self.current.text or "end of input"
            raise ExprSyntaxError(f"expected '{text}', found '{found}'", self.current.offset)
        return self.advance()

    def parse(self) -> Node:
        if self.current.kind == "eof":
            raise ExprSyntaxError("empty expression", self.current.offset)
        node = self.expr()
        if self.current.kind != "eof":
            raise ExprSyntaxError(f"unexpected '{self.current.text}'", self.current.offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.text in ("+", "-"):
            op = self.advance().text
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.current.text in ("*", "/"):
            op = self.advance().text
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.current.text == "-":
            self.advance()
            return Negate(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.current.text == "^":
            self.advance()
            return BinaryOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        token = self.current
        if token.kind == "number":
            value = float(token.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"number '{token.text}' is out of range", token.offset)
            self.advance()
            return Number(value)
        if token.kind == "ident":
            self.advance()
            if token.text == self.variable:
                return Variable(token.text)
            if token.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(token.text, arg)
            raise UnknownIdentifierError(token.text, token.offset)
        if token.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = token.text or "end of input"
        raise ExprSyntaxError(f"unexpected '{found}'", token.offset)


def parse_tree(source: str, variable: str = "x") -> Node:
    """Parse source text into a bare syntax tree."""
    return Parser(source, variable).parse()
