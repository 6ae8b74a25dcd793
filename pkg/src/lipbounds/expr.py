"""A tiny arithmetic expression language for ad hoc functions.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | VAR | FUNC "(" expr ")" | "(" expr ")"

Variables are ``x1 .. xn``; functions are ``sin cos exp log``.  ``^`` is
right-associative and binds tighter than unary minus, so ``-x1^2`` is
``-(x1^2)``.  Compiled expressions evaluate on arrays of shape ``(..., n)``.
"""

from __future__ import annotations

import re
from typing import Callable

import numpy as np

__all__ = ["ExpressionError", "Expression", "parse"]

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log}
_BINOPS = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide, "^": np.power}
_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(.))")


class ExpressionError(ValueError):
    pass


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        num, name, sym = m.groups()
        start = m.start(m.lastindex) if m.lastindex else pos
        if num is not None:
            out.append(("num", float(num), start))
        elif name is not None:
            out.append(("name", name, start))
        elif sym is not None:
            if sym not in "+-*/^()":
                raise ExpressionError(f"unexpected character {sym!r} at position {start}")
            out.append(("sym", sym, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.max_var = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, sym):
        kind, val, pos = self.take()
        if kind != "sym" or val != sym:
            raise ExpressionError(f"expected {sym!r} at position {pos}")

    def parse(self):
        node = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected trailing input at position {pos}")
        return node

    def _binary(self, ops, operand):
        node = operand()
        while self.peek()[0] == "sym" and self.peek()[1] in ops:
            op = _BINOPS[self.take()[1]]
            rhs = operand()
            node = (lambda l, r, op: lambda X: op(l(X), r(X)))(node, rhs, op)
        return node

    def expr(self):
        return self._binary("+-", self.term)

    def term(self):
        return self._binary("*/", self.unary)

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "sym" and val in "+-":
            self.take()
            inner = self.unary()
            return inner if val == "+" else (lambda X: np.negative(inner(X)))
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "sym" and self.peek()[1] == "^":
            self.take()
            exponent = self.unary()
            return lambda X: np.power(base(X), exponent(X))
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return lambda X, v=val: np.full(X.shape[:-1], v)
        if kind == "sym" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if val in _FUNCS:
                fn = _FUNCS[val]
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return lambda X: fn(arg(X))
            m = re.fullmatch(r"x([1-9]\d*)", val)
            if m:
                idx = int(m.group(1))
                self.max_var = max(self.max_var, idx)
                return lambda X, j=idx - 1: X[..., j]
            raise ExpressionError(f"unknown name {val!r} at position {pos}")
        if kind == "end":
            raise ExpressionError("unexpected end of expression")
        raise ExpressionError(f"unexpected {val!r} at position {pos}")


class Expression:
    """Parsed expression, callable on ``(..., n)`` arrays."""

    def __init__(self, text: str):
        p = _Parser(text)
        self._fn: Callable = p.parse()
        self.text = text
        self.max_var = p.max_var

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        if self.max_var > X.shape[-1]:
            raise ExpressionError(f"expression uses x{self.max_var} but points have {X.shape[-1]} coordinates")
        with np.errstate(all="ignore"):
            return np.asarray(self._fn(X), dtype=float)

    def __repr__(self) -> str:
        return f"Expression({self.text!r})"


def parse(text: str) -> Expression:
    return Expression(text)
