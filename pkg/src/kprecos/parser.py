"""Pratt parser for the infix expression grammar used in model files and reports.

Grammar::

    expr    := expr ('+'|'-') expr | expr ('*'|'/') expr | '-' expr | atom '^' expr | atom
    atom    := INTEGER | NAME | NAME '(' NAME (',' NAME)* ')' | 'd(' NAME ')' ('/d' NAME)+
             | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)``.  Exponents must evaluate to integers.  A declared opaque
function may be written bare (``sigma``) or applied to its declared
arguments (``sigma(t, s)``).  ``d(sigma)/dt`` is the formal partial; the
``/dX`` suffixes are consumed greedily while ``X`` is an argument of the
function.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

import sympy as sp
from sympy.core.function import AppliedUndef

from .errors import ParseError
from .symbolic import Expr, normalize

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


@dataclass(frozen=True)
class Token:
    kind: str  # int | name | op | end
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while True:
        while pos < len(text) and text[pos].isspace():
            if text[pos] == "\n":
                line += 1
                line_start = pos + 1
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        col = m.start(m.lastindex) - line_start + 1
        num, name, op = m.groups()
        if num is not None:
            tokens.append(Token("int", num, line, col))
        elif name is not None:
            tokens.append(Token("name", name, line, col))
        elif op in "+-*/^(),":
            tokens.append(Token("op", op, line, col))
        else:
            raise ParseError(f"unexpected character {op!r}", line, col)
        pos = m.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_PREFIX_MINUS = 25


class _Parser:
    def __init__(self, text: str, namespace: Mapping[str, Expr]):
        self.tokens = tokenize(text)
        self.i = 0
        self.ns = namespace

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.kind != "op" or t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.column)
        return self.advance()

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise ParseError("empty expression", self.tok.line, self.tok.column)
        e = self.expression(0)
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.line, self.tok.column)
        return e

    def expression(self, rbp: int) -> Expr:
        left = self.nud(self.advance())
        while self.tok.kind == "op" and _INFIX.get(self.tok.text, -1) > rbp:
            left = self.led(self.advance(), left)
        return left

    def nud(self, t: Token) -> Expr:
        if t.kind == "int":
            return sp.Integer(int(t.text))
        if t.kind == "name":
            return self.name(t)
        if t.kind == "op" and t.text == "-":
            return -self.expression(_PREFIX_MINUS)
        if t.kind == "op" and t.text == "(":
            e = self.expression(0)
            self.expect(")")
            return e
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.line, t.column)

    def led(self, t: Token, left: Expr) -> Expr:
        op = t.text
        if op == "^":
            exp_tok = self.tok
            right = self.expression(_INFIX["^"] - 1)
            if not (right.is_Integer):
                raise ParseError("exponents must be integers", exp_tok.line, exp_tok.column)
            return left**right
        right = self.expression(_INFIX[op])
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if right == 0:
            raise ParseError("division by zero", t.line, t.column)
        return left / right

    def _function(self, name: str):
        e = self.ns.get(name)
        return e if isinstance(e, AppliedUndef) else None

    def name(self, t: Token) -> Expr:
        nxt = self.tok
        if t.text == "d" and nxt.kind == "op" and nxt.text == "(" and self._function(self.peek().text) is not None:
            return self.partial(t)
        app = self._function(t.text)
        if app is not None:
            if nxt.kind == "op" and nxt.text == "(":
                self.advance()
                args = [self.advance()]
                while self.tok.kind == "op" and self.tok.text == ",":
                    self.advance()
                    args.append(self.advance())
                self.expect(")")
                got = tuple(a.text for a in args)
                want = tuple(str(a) for a in app.args)
                if got != want:
                    raise ParseError(f"{t.text} is declared as {t.text}({', '.join(want)})", t.line, t.column)
            return app
        if t.text not in self.ns:
            raise ParseError(f"undeclared identifier {t.text!r}", t.line, t.column)
        return self.ns[t.text]

    def partial(self, t: Token) -> Expr:
        self.expect("(")
        ft = self.advance()
        app = self._function(ft.text)
        self.expect(")")
        args = {str(a): a for a in app.args}
        variables = []
        while (
            self.tok.kind == "op"
            and self.tok.text == "/"
            and self.peek().kind == "name"
            and self.peek().text.startswith("d")
            and self.peek().text[1:] in args
        ):
            self.advance()
            variables.append(args[self.advance().text[1:]])
        if not variables:
            raise ParseError(f"d({ft.text}) needs at least one /dX with X an argument of {ft.text}", t.line, t.column)
        return sp.diff(app, *variables)


def parse_expression(text: str, namespace: Mapping[str, Expr], normal: bool = True) -> Expr:
    """Parse ``text`` over ``namespace`` (name -> symbol or opaque application)."""
    e = _Parser(text, namespace).parse()
    return normalize(e) if normal else e
