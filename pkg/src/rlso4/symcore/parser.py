"""Recursive-descent parser for the operator DSL.

Grammar (whitespace insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := primary ('^' ['-'] INT)?
    primary := INT | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

Atoms are ``X1..X3``, ``P1..P3``, ``S`` (= 1/R), the scalars ``hbar``,
``mu``, ``kappa`` and ``i``. Named operators (``H0``, ``L1..L3``,
``M1..M3``, ``T1..T3``, ...) come from :mod:`rlso4.identities`. Functions
are ``comm(A, B)`` and ``adj(A)``. Division and negative exponents are only
allowed for single-term scalars.
"""

from __future__ import annotations

import re
from typing import Callable, Mapping

from .coeff import Gaussian, ScalarCoeff
from .expr import OperatorExpr, adjoint, commutator

__all__ = ["parse_expr", "DSLError", "DSLSyntaxError", "UnknownIdentifierError"]


class DSLError(ValueError):
    """Base class for DSL errors; ``pos`` is the 0-based character offset."""

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class DSLSyntaxError(DSLError):
    pass


class UnknownIdentifierError(DSLError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")

_SCALARS = {
    "hbar": ScalarCoeff(1, (1, 0, 0)),
    "mu": ScalarCoeff(1, (0, 1, 0)),
    "kappa": ScalarCoeff(1, (0, 0, 1)),
    "i": ScalarCoeff(Gaussian(0, 1)),
}
_ATOMS = ("X1", "X2", "X3", "S", "P1", "P2", "P3")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("ident", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^(),":
                raise DSLSyntaxError(f"unexpected character {ch!r}", m.start(3))
            tokens.append(("op", ch, m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _default_env() -> Mapping[str, OperatorExpr]:
    from ..identities import operator_table

    return operator_table()


class _Parser:
    def __init__(self, text: str, env: Callable[[], Mapping[str, OperatorExpr]] | Mapping):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self._env_src = env
        self._env = None

    def env(self) -> Mapping[str, OperatorExpr]:
        if self._env is None:
            src = self._env_src
            self._env = src() if callable(src) else src
        return self._env

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value or kind != "op":
            raise DSLSyntaxError(f"expected {value!r}, got {v or 'end of input'!r}", pos)

    def parse(self) -> OperatorExpr:
        if self.peek()[0] == "end":
            raise DSLSyntaxError("empty expression", 0)
        out = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise DSLSyntaxError(f"unexpected token {v!r}", pos)
        return out

    def expr(self) -> OperatorExpr:
        out = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> OperatorExpr:
        out = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "*":
                out = out * rhs
            else:
                if rhs.is_zero():
                    raise DSLSyntaxError("division by zero", pos)
                if not rhs.is_scalar():
                    raise DSLSyntaxError("can only divide by a single scalar term", pos)
                out = out.scale(rhs.as_scalar().inverse())
        return out

    def unary(self) -> OperatorExpr:
        kind, v, _ = self.peek()
        if kind == "op" and v in ("+", "-"):
            self.take()
            inner = self.unary()
            return -inner if v == "-" else inner
        return self.power()

    def power(self) -> OperatorExpr:
        base = self.primary()
        kind, v, pos = self.peek()
        if kind == "op" and v == "^":
            self.take()
            neg = False
            if self.peek()[1] == "-" and self.peek()[0] == "op":
                self.take()
                neg = True
            kind, v, epos = self.take()
            if kind != "int":
                raise DSLSyntaxError("exponent must be an integer literal", epos)
            k = int(v)
            if neg:
                if not base.is_scalar():
                    raise DSLSyntaxError(
                        "negative exponent on a noncommuting atom or operator", pos)
                return OperatorExpr.constant(base.as_scalar() ** (-k))
            return base ** k
        return base

    def primary(self) -> OperatorExpr:
        kind, v, pos = self.take()
        if kind == "int":
            return OperatorExpr.constant(int(v))
        if kind == "op" and v == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "ident":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                return self.call(v, pos)
            if v in _SCALARS:
                return OperatorExpr.constant(_SCALARS[v])
            if v in _ATOMS:
                return OperatorExpr.atom(v)
            env = self.env()
            if v in env:
                return env[v]
            raise UnknownIdentifierError(f"unknown identifier {v!r}", pos)
        raise DSLSyntaxError(f"unexpected token {v or 'end of input'!r}", pos)

    def call(self, name: str, pos: int) -> OperatorExpr:
        self.expect("(")
        args = [self.expr()]
        while self.peek()[1] == "," and self.peek()[0] == "op":
            self.take()
            args.append(self.expr())
        self.expect(")")
        if name == "comm":
            if len(args) != 2:
                raise DSLSyntaxError("comm takes exactly two arguments", pos)
            return commutator(*args)
        if name == "adj":
            if len(args) != 1:
                raise DSLSyntaxError("adj takes exactly one argument", pos)
            return adjoint(args[0])
        raise UnknownIdentifierError(f"unknown function {name!r}", pos)


def parse_expr(text: str, env: Mapping[str, OperatorExpr] | None = None) -> OperatorExpr:
    """Parse ``text`` into its canonical :class:`OperatorExpr`.

    ``env`` overrides the table of named operators (defaults to the
    hydrogen operators built in :mod:`rlso4.identities`).
    """
    return _Parser(text, _default_env if env is None else env).parse()
