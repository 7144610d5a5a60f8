"""Small arithmetic expression language for right-hand sides.

Grammar (recursive descent, one token of lookahead):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

'^' is right associative and binds tighter than unary minus, so -2^2 is -4
and 2^3^2 is 512.  Variables are exactly x, y and z.  Functions are exp,
log, sin, cos, sqrt and abs, each taking one argument.  Evaluation accepts
scalars or numpy arrays and raises EvalError on domain faults (log of a
non-positive value, division by zero, fractional power of a negative base)
instead of propagating NaN.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "ParseError",
    "EvalError",
    "Num",
    "Var",
    "Call",
    "Neg",
    "BinOp",
    "Expr",
    "parse",
    "evaluate",
    "to_source",
    "as_function",
]


class ParseError(ValueError):
    """Malformed expression source; carries the failing position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class EvalError(ArithmeticError):
    """Domain fault during evaluation; names the offending subexpression."""

    def __init__(self, message: str, source: str):
        super().__init__(f"{message} in '{source}'")
        self.message = message
        self.source = source


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Call, Neg, BinOp]

_VARIABLES = ("x", "y", "z")
_FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt", "abs")

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            bad_pos = len(source) - len(stripped)
            raise ParseError(f"unexpected character {stripped[0]!r}", bad_pos)
        for kind in ("number", "ident", "op"):
            text = match.group(kind)
            if text is not None:
                tokens.append((kind, text, match.start(kind)))
                break
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.index = 0

    def _peek(self) -> tuple[str, str, int] | None:
        if self.index < len(self.tokens):
            return self.tokens[self.index]
        return None

    def _advance(self) -> tuple[str, str, int]:
        token = self._peek()
        if token is None:
            raise ParseError("unexpected end of input", len(self.source))
        self.index += 1
        return token

    def _expect_op(self, symbol: str) -> None:
        token = self._peek()
        if token is None:
            raise ParseError(f"expected '{symbol}'", len(self.source))
        if token[0] != "op" or token[1] != symbol:
            raise ParseError(f"expected '{symbol}', found {token[1]!r}", token[2])
        self.index += 1

    def parse(self) -> Expr:
        node = self.expr()
        token = self._peek()
        if token is not None:
            raise ParseError(f"unexpected trailing {token[1]!r}", token[2])
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            token = self._peek()
            if token is not None and token[0] == "op" and token[1] in "+-":
                self.index += 1
                node = BinOp(token[1], node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            token = self._peek()
            if token is not None and token[0] == "op" and token[1] in "*/":
                self.index += 1
                node = BinOp(token[1], node, self.unary())
            else:
                return node

    def unary(self) -> Expr:
        token = self._peek()
        if token is not None and token[0] == "op" and token[1] == "-":
            self.index += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        token = self._peek()
        if token is not None and token[0] == "op" and token[1] == "^":
            self.index += 1
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, pos = self._advance()
        if kind == "number":
            return Num(float(text))
        if kind == "ident":
            if text in _VARIABLES:
                return Var(text)
            if text in _FUNCTIONS:
                nxt = self._peek()
                if nxt is None or nxt[0] != "op" or nxt[1] != "(":
                    raise ParseError(f"function '{text}' requires a parenthesized argument", pos)
                self.index += 1
                arg = self.expr()
                self._expect_op(")")
                return Call(text, arg)
            raise ParseError(f"unknown identifier '{text}'", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self._expect_op(")")
            return node
        raise ParseError(f"expected a value, found {text!r}", pos)


def parse(source: str) -> Expr:
    """Parse source text into an expression tree."""
    parser = _Parser(source)
    node = parser.parse()
    return node


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    if isinstance(node, Num) and node.value < 0:
        return _PREC["neg"]
    return _PREC["atom"]


def to_source(node: Expr) -> str:
    """Render a tree back to source; reparsing yields the identical tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.arg)
        if _prec(node.arg) <= _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = to_source(node.left)
        right = to_source(node.right)
        if node.op == "^":
            if _prec(node.left) <= p:
                left = f"({left})"
            if _prec(node.right) < p:
                right = f"({right})"
        else:
            if _prec(node.left) < p:
                left = f"({left})"
            if _prec(node.right) <= p:
                right = f"({right})"
        return f"{left}{node.op}{right}"
    raise TypeError(f"not an expression node: {node!r}")


def _check(condition: bool, message: str, node: Expr) -> None:
    if not condition:
        raise EvalError(message, to_source(node))


def _eval(node: Expr, env: dict):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.arg, env)
    if isinstance(node, Call):
        arg = _eval(node.arg, env)
        if node.func == "log":
            _check(bool(np.all(np.asarray(arg) > 0.0)), "log of a non-positive value", node)
            return np.log(arg)
        if node.func == "sqrt":
            _check(bool(np.all(np.asarray(arg) >= 0.0)), "sqrt of a negative value", node)
            return np.sqrt(arg)
        if node.func == "exp":
            return np.exp(arg)
        if node.func == "sin":
            return np.sin(arg)
        if node.func == "cos":
            return np.cos(arg)
        if node.func == "abs":
            return np.abs(arg)
        raise EvalError(f"unknown function '{node.func}'", to_source(node))
    if isinstance(node, BinOp):
        left = _eval(node.left, env)
        right = _eval(node.right, env)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            _check(bool(np.all(np.asarray(right) != 0.0)), "division by zero", node)
            return left / right
        if node.op == "^":
            base = np.asarray(left)
            expo = np.asarray(right)
            fractional = expo != np.floor(expo)
            _check(
                not bool(np.any((base < 0.0) & fractional)),
                "fractional power of a negative base",
                node,
            )
            _check(
                not bool(np.any((base == 0.0) & (expo < 0.0))),
                "zero raised to a negative power",
                node,
            )
            return np.power(left, right)
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: Expr, x, y, z):
    """Evaluate a tree at (x, y, z); scalars in give a float back.

    Domain faults (log of a non-positive value, square root of a negative
    value, division by zero, fractional powers of negative bases, zero to a
    negative power) raise EvalError; overflow saturates to infinity.
    """
    def coerce(v):
        return float(v) if np.ndim(v) == 0 else np.asarray(v, dtype=float)

    with np.errstate(over="ignore", under="ignore"):
        result = _eval(node, {"x": coerce(x), "y": coerce(y), "z": coerce(z)})
    if np.ndim(result) == 0:
        return float(result)
    return np.asarray(result, dtype=float)


def as_function(f) -> Callable:
    """Coerce an expression tree, source string or callable to f(x, y, z)."""
    if callable(f):
        return f
    if isinstance(f, str):
        f = parse(f)
    if isinstance(f, (Num, Var, Call, Neg, BinOp)):
        tree = f
        return lambda x, y, z: evaluate(tree, x, y, z)
    raise TypeError(f"cannot interpret {f!r} as a right-hand side")
