"""Scalar expression DSL used to describe immersion components.

Grammar (ASCII, whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus (``-u^2`` is ``-(u^2)``) and is
right-associative (``u^2^3`` is ``u^(2^3)``). The exponent must not contain
variables. Identifiers start with a letter and continue with letters, digits
or underscores; ``pi`` and ``e`` are constants unless declared as variables.

Functions: sin cos tan exp log sqrt sinh cosh tanh.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ExprSyntaxError, NonConstantExponent, UnknownIdentifier

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh")
UNARY_OPS = ("neg",) + FUNCTIONS
BINARY_OPS = ("+", "-", "*", "/", "^")
NAMED_CONSTANTS = {"pi": math.pi, "e": math.e}

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM_PREC = 5


class Expr:
    """Base class of AST nodes. Nodes are immutable and compare structurally."""

    __slots__ = ()

    def __add__(self, other):
        return Binary("+", self, as_expr(other))

    def __radd__(self, other):
        return Binary("+", as_expr(other), self)

    def __sub__(self, other):
        return Binary("-", self, as_expr(other))

    def __rsub__(self, other):
        return Binary("-", as_expr(other), self)

    def __mul__(self, other):
        return Binary("*", self, as_expr(other))

    def __rmul__(self, other):
        return Binary("*", as_expr(other), self)

    def __truediv__(self, other):
        return Binary("/", self, as_expr(other))

    def __rtruediv__(self, other):
        return Binary("/", as_expr(other), self)

    def __pow__(self, other):
        exponent = as_expr(other)
        if variables_of(exponent):
            raise NonConstantExponent(0)
        return Binary("^", self, exponent)

    def __neg__(self):
        return Unary("neg", self)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True, repr=True)
class Variable(Expr):
    name: str


@dataclass(frozen=True, eq=True, repr=True)
class Constant(Expr):
    value: float


@dataclass(frozen=True, eq=True, repr=True)
class Unary(Expr):
    op: str
    child: Expr


@dataclass(frozen=True, eq=True, repr=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


def const(value) -> Expr:
    """Constant node; negative values become ``neg(|value|)`` so printing round-trips."""
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite constant {value}")
    if value < 0:
        return Unary("neg", Constant(-value))
    return Constant(value)


def as_expr(obj) -> Expr:
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, (int, float, np.floating, np.integer)):
        return const(obj)
    raise TypeError(f"cannot convert {type(obj).__name__} to Expr")


def func(name: str, child) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    return Unary(name, as_expr(child))


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _byte_offset(text, index):
    return len(text[:index].encode("utf-8"))


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(text, n)))
    return tokens


class _Parser:
    def __init__(self, text, variables):
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = set(variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value or tok[0] == "end":
            raise ExprSyntaxError(f"expected {value!r}", tok[2])
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Unary("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            start = self.peek()[2]
            exponent = self.unary()
            if variables_of(exponent):
                raise NonConstantExponent(start)
            return Binary("^", base, exponent)
        return base

    def atom(self):
        kind, value, offset = self.take()
        if kind == "number":
            return Constant(float(value))
        if kind == "ident":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if value not in FUNCTIONS:
                    raise UnknownIdentifier(value, offset)
                self.take()
                child = self.expr()
                self.expect(")")
                return Unary(value, child)
            if value in self.variables:
                return Variable(value)
            if value in NAMED_CONSTANTS:
                return Constant(NAMED_CONSTANTS[value])
            raise UnknownIdentifier(value, offset)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", offset)
        raise ExprSyntaxError(f"unexpected token {value!r}", offset)


def parse(text: str, variables: Sequence[str]) -> Expr:
    """Parse ``text`` into an AST over the declared ``variables``."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text, variables).parse()


# ---------------------------------------------------------------------------
# printing


def _prec(node):
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary) and node.op == "neg":
        return _PREC["neg"]
    return _ATOM_PREC


def _fmt_constant(value):
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def to_text(node: Expr) -> str:
    """Render ``node`` with the minimal parentheses the grammar needs."""
    if isinstance(node, Variable):
        return node.name
    if isinstance(node, Constant):
        return _fmt_constant(node.value)
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = to_text(node.child)
            if _prec(node.child) < _PREC["neg"]:
                inner = f"({inner})"
            return "-" + inner
        return f"{node.op}({to_text(node.child)})"
    if isinstance(node, Binary):
        p = _PREC[node.op]
        left, right = to_text(node.left), to_text(node.right)
        if node.op == "^":
            if _prec(node.left) <= p:
                left = f"({left})"
            if _prec(node.right) < _PREC["neg"]:
                right = f"({right})"
            return f"{left}^{right}"
        # left operand of '*'/'/' may be a bare negation; of '+'/'-' likewise
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
        if node.op in "+-":
            return f"{left} {node.op} {right}"
        return f"{left}{node.op}{right}"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# utilities


def variables_of(node: Expr) -> set:
    if isinstance(node, Variable):
        return {node.name}
    if isinstance(node, Constant):
        return set()
    if isinstance(node, Unary):
        return variables_of(node.child)
    return variables_of(node.left) | variables_of(node.right)


def substitute(node: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions (expression-level composition)."""
    if isinstance(node, Variable):
        return mapping.get(node.name, node)
    if isinstance(node, Constant):
        return node
    if isinstance(node, Unary):
        return Unary(node.op, substitute(node.child, mapping))
    return Binary(node.op, substitute(node.left, mapping), substitute(node.right, mapping))


_NP_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
}


def evaluate(node: Expr, env: Mapping[str, object]):
    """Plain floating-point evaluation; ``env`` values may be numpy arrays."""
    if isinstance(node, Variable):
        return env[node.name]
    if isinstance(node, Constant):
        return node.value
    if isinstance(node, Unary):
        x = evaluate(node.child, env)
        if node.op == "neg":
            return -x
        return _NP_FUNCS[node.op](x)
    a = evaluate(node.left, env)
    b = evaluate(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    if float(b).is_integer():
        return a ** int(b)
    return np.exp(b * np.log(a))
