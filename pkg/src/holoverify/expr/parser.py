"""Tokenizer and recursive-descent parser.

Grammar, loosest binding first::

    expr    := term { ("+" | "-") term }
    term    := factor { ("*" | "/") factor }
    factor  := "-" factor | power
    power   := primary [ "^" factor ]
    primary := number | constant | variable | func "(" expr ")" | "(" expr ")"

``^`` is right-associative and binds tighter than unary minus, so ``-2^2``
is ``-(2^2)`` while ``2^-1`` is still accepted.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError
from .nodes import CONSTANTS, FUNCTIONS, BinOp, Call, Const, Expr, Mode, Neg, Num, Var, get_mode

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    offset: int  # byte offset


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    byte_pos = 0

    def advance(n):
        nonlocal pos, byte_pos
        byte_pos += len(text[pos:pos + n].encode("utf-8"))
        pos += n

    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            advance(1)
            continue
        if ch.isdigit() or (ch == "." and pos + 1 < len(text) and text[pos + 1].isdigit()):
            m = _NUMBER.match(text, pos)
            tokens.append(Token("num", m.group(), byte_pos))
            advance(m.end() - pos)
            continue
        m = _IDENT.match(text, pos)
        if m:
            tokens.append(Token("ident", m.group(), byte_pos))
            advance(m.end() - pos)
            continue
        if ch in "+-*/^()":
            tokens.append(Token("op", ch, byte_pos))
            advance(1)
            continue
        raise ParseError(f"unexpected character {ch!r}", byte_pos, text)
    tokens.append(Token("end", "", byte_pos))
    return tokens


class _Parser:
    def __init__(self, text: str, mode: Mode):
        self.text = text
        self.mode = mode
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.offset, self.text)

    def accept(self, op):
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op):
        if not self.accept(op):
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise self.error(f"expected {op!r}, found {found}")

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.accept("-"):
            return Neg(self.factor())
        base = self.primary()
        if self.accept("^"):
            return BinOp("^", base, self.factor())
        return base

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if name in self.mode.variables:
                return Var(name)
            if name in CONSTANTS:
                return Const(name)
            if name in ("x", "y", "z", "t", "s"):
                raise self.error(f"variable {name!r} is not legal in mode {self.mode.name}", tok)
            raise self.error(f"unknown identifier {name!r}", tok)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {tok.text!r}")


def parse(text: str, mode: Mode | str = "z") -> Expr:
    """Parse ``text`` into an :class:`Expr` whose variables are legal in ``mode``.

    Variables shadow constants, so in a mode that declares ``e`` or ``i`` as a
    variable the constant is unavailable; none of the built-in modes do.
    """
    mode = get_mode(mode)
    if not text or not text.strip():
        raise ParseError("empty expression", 0, text)
    return Expr(_Parser(text, mode).parse(), mode)
