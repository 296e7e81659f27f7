"""Tiny infix expression language for scalar fields f(t, x).

Grammar (LL(1), standard precedence, ``^`` right-associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 't' | 'x' | 'pi' | NAME '(' args ')' | '(' expr ')'

Evaluation is vectorised over numpy arrays.  Division by zero and the square
root of a negative number raise :class:`EvaluationError` instead of producing
inf/nan.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "ExpressionError",
    "ParseError",
    "EvaluationError",
    "Num",
    "Var",
    "Pi",
    "Neg",
    "BinOp",
    "Call",
    "parse_field",
    "to_text",
    "evaluate",
    "variables",
]


class ExpressionError(ValueError):
    pass


class ParseError(ExpressionError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvaluationError(ExpressionError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Pi, Neg, BinOp, Call]

FUNCTIONS = {"sin": 1, "cos": 1, "abs": 1, "sqrt": 1, "pow": 2, "clamp": 3}
VARIABLES = ("t", "x")

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.tok
        if text != value or kind == "eof":
            found = "end of input" if kind == "eof" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.tok
        if kind != "eof":
            raise ParseError(f"unexpected {text!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, text, pos = self.tok
        if kind == "num":
            self.advance()
            return Num(float(text))
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            self.advance()
            if text in VARIABLES:
                return Var(text)
            if text == "pi":
                return Pi()
            if text not in FUNCTIONS:
                raise ParseError(f"unknown identifier {text!r}", pos)
            self.expect("(")
            args = [self.expr()]
            while self.tok[0] == "op" and self.tok[1] == ",":
                self.advance()
                args.append(self.expr())
            self.expect(")")
            if len(args) != FUNCTIONS[text]:
                raise ParseError(
                    f"{text} takes {FUNCTIONS[text]} argument(s), got {len(args)}", pos
                )
            return Call(text, tuple(args))
        found = "end of input" if kind == "eof" else repr(text)
        raise ParseError(f"unexpected {found}", pos)


def parse_field(text: str) -> Node:
    """Parse an expression in ``t`` and ``x``."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()


def to_text(node: Node) -> str:
    """Fully parenthesised canonical text; ``parse_field(to_text(n)) == n``."""
    if isinstance(node, Num):
        if node.value < 0 or not np.isfinite(node.value):
            raise ExpressionError(f"cannot print literal {node.value!r}")
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)}{node.op}{to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({','.join(to_text(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


def variables(node: Node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Call):
        return set().union(*(variables(a) for a in node.args))
    return set()


def evaluate(node: Node, t, x):
    """Evaluate ``node`` at broadcastable arrays ``t`` and ``x``."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    shape = np.broadcast(t, x).shape
    with np.errstate(all="ignore"):
        out = _eval(node, t, x)
    out = np.broadcast_to(np.asarray(out, dtype=float), shape)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("expression produced a non-finite value")
    return out.copy() if out.ndim else float(out)


def _eval(node: Node, t, x):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Pi):
        return np.pi
    if isinstance(node, Var):
        return t if node.name == "t" else x
    if isinstance(node, Neg):
        return -_eval(node.operand, t, x)
    if isinstance(node, BinOp):
        a = _eval(node.left, t, x)
        b = _eval(node.right, t, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if np.any(np.asarray(b) == 0):
                raise EvaluationError("division by zero")
            return a / b
        return _power(a, b)
    if isinstance(node, Call):
        args = [_eval(a, t, x) for a in node.args]
        name = node.name
        if name == "sin":
            return np.sin(args[0])
        if name == "cos":
            return np.cos(args[0])
        if name == "abs":
            return np.abs(args[0])
        if name == "sqrt":
            if np.any(np.asarray(args[0]) < 0):
                raise EvaluationError("sqrt of a negative number")
            return np.sqrt(args[0])
        if name == "pow":
            return _power(*args)
        lo, hi = args[1], args[2]
        return np.minimum(np.maximum(args[0], lo), hi)
    raise TypeError(f"not an expression node: {node!r}")


def _power(a, b):
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    bad = (a_arr < 0) & (b_arr != np.round(b_arr))
    if np.any(bad):
        raise EvaluationError("fractional power of a negative number")
    if np.any((a_arr == 0) & (b_arr < 0)):
        raise EvaluationError("division by zero")
    return np.power(a, b)
