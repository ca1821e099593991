"""Tiny arithmetic expression parser for user-specified scalar fields.

Grammar (highest precedence first):

    ^  (right associative)  >  unary -  >  * /  >  + -

with functions ``sin``, ``cos``, ``exp``, variables ``x``, ``y``, ``z``,
decimal literals, and parentheses.  ``compile_field`` returns a vectorized
callable mapping an ``(..., 3)`` point array to ``(...)`` values, suitable
as an implicit surface field or a surface integrand.
"""

from __future__ import annotations

import re

import numpy as np

__all__ = ["compile_field", "ExpressionError"]

_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_VARIABLES = {"x": 0, "y": 1, "z": 2}


class ExpressionError(ValueError):
    """Malformed field expression."""


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match:
            raise ExpressionError(f"unexpected character {text[pos]!r} at position {pos}")
        if match.group("number"):
            tokens.append(("number", float(match.group("number")), pos))
        elif match.group("name"):
            tokens.append(("name", match.group("name"), pos))
        else:
            tokens.append(("op", match.group("op"), pos))
        pos = match.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect_op(self, op: str):
        kind, value, at = self.advance()
        if kind != "op" or value != op:
            raise ExpressionError(f"expected {op!r} at position {at} in {self.text!r}")

    def parse(self):
        node = self.expression()
        kind, _, at = self.peek()
        if kind != "end":
            raise ExpressionError(f"trailing input at position {at} in {self.text!r}")
        return node

    def expression(self):
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.advance()[1]
            rhs = self.term()
            node = (lambda a, b: lambda p: a(p) + b(p))(node, rhs) if op == "+" else (
                lambda a, b: lambda p: a(p) - b(p)
            )(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.advance()[1]
            rhs = self.unary()
            node = (lambda a, b: lambda p: a(p) * b(p))(node, rhs) if op == "*" else (
                lambda a, b: lambda p: a(p) / b(p)
            )(node, rhs)
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            inner = self.unary()
            return lambda p: -inner(p)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            exponent = self.unary()
            return lambda p: np.power(base(p), exponent(p))
        return base

    def atom(self):
        kind, value, at = self.advance()
        if kind == "number":
            return lambda p, c=value: c
        if kind == "name":
            if value in _VARIABLES:
                axis = _VARIABLES[value]
                return lambda p, a=axis: p[..., a]
            if value in _FUNCTIONS:
                fn = _FUNCTIONS[value]
                self.expect_op("(")
                inner = self.expression()
                self.expect_op(")")
                return lambda p, f=fn, g=inner: f(g(p))
            raise ExpressionError(f"unknown name {value!r} at position {at} (variables x, y, z; functions sin, cos, exp)")
        if (kind, value) == ("op", "("):
            inner = self.expression()
            self.expect_op(")")
            return inner
        raise ExpressionError(f"unexpected token at position {at} in {self.text!r}")


def compile_field(text: str):
    """Compile an expression in x, y, z to a vectorized field callable."""
    node = _Parser(text).parse()

    def field(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        out = node(points)
        return np.broadcast_to(np.asarray(out, dtype=np.float64), points.shape[:-1])

    field.expression = text
    return field
