"""Small expression language for map components.

Grammar (standard precedence, integer exponents bind tighter than unary
minus, so -x1^2 means -(x1^2)):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ['^' integer]
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'

Identifiers are either variables (x1, x2, ..., and t as a synonym for
the first coordinate) or the function names sin, cos, exp, sqrt applied
with call syntax. Trees are immutable; evaluation maps variables to
jets through an environment and runs entirely in the jet ring.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

from affinejet import jets
from affinejet.jets import Jet

FUNCTIONS = ("sin", "cos", "exp", "sqrt")


class ExprError(ValueError):
    """Syntax or naming problem in an expression string."""


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str                      # neg, sin, cos, exp, sqrt
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str                      # + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Power:
    base: "Expr"
    exponent: int


Expr = Union[Const, Var, Unary, Binary, Power]

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
                    r"|\d+(?:[eE][+-]?\d+)?)|([A-Za-z_][A-Za-z_0-9]*)"
                    r"|([-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ExprError(f"unexpected character {text[pos]!r} at "
                            f"position {pos}")
        if m.group(1) is not None:
            tokens.append(("num", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("ident", m.group(2), m.start(2)))
        else:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            where = "end of input" if kind == "end" else f"position {pos}"
            raise ExprError(f"expected {op!r} at {where}")
        self.take()

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected {val!r} at position {pos}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                e = Binary(val, e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                e = Binary(val, e, self.unary())
            else:
                return e

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return Power(base, self._integer())
        return base

    def _integer(self) -> int:
        sign = 1
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.take()
            sign = -1
            kind, val, pos = self.peek()
        if kind != "num" or any(c in val for c in ".eE"):
            where = "end of input" if kind == "end" else f"position {pos}"
            raise ExprError(f"expected integer exponent at {where}")
        self.take()
        return sign * int(val)

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "ident":
            nkind, nval, _ = self.peek()
            if nkind == "op" and nval == "(":
                if val not in FUNCTIONS:
                    raise ExprError(f"unknown function {val!r} at "
                                    f"position {pos}")
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return Unary(val, arg)
            return Var(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        where = "end of input" if kind == "end" else f"{val!r} at position {pos}"
        raise ExprError(f"expected a value, got {where}")


def parse(text: str) -> Expr:
    return _Parser(text).parse()


def free_variables(e: Expr) -> frozenset[str]:
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Unary):
        return free_variables(e.arg)
    if isinstance(e, Power):
        return free_variables(e.base)
    return free_variables(e.left) | free_variables(e.right)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "pow": 4, "atom": 5}


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return _PREC["atom"] if e.op in FUNCTIONS else _PREC["neg"]
    if isinstance(e, Power):
        return _PREC["pow"]
    return _PREC["atom"]


def to_string(e: Expr) -> str:
    """Print with minimal parentheses; parse(to_string(e)) == e."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = to_string(e.arg)
            if _prec(e.arg) < _PREC["neg"]:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{e.op}({to_string(e.arg)})"
    if isinstance(e, Power):
        base = to_string(e.base)
        if _prec(e.base) < _PREC["atom"]:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    left, right = to_string(e.left), to_string(e.right)
    p = _PREC[e.op]
    if _prec(e.left) < p:
        left = f"({left})"
    # - and / do not associate on the right
    if _prec(e.right) < p or (_prec(e.right) == p and e.op in "-/"):
        right = f"({right})"
    return f"{left} {e.op} {right}"


def evaluate(e: Expr, env: Mapping[str, Jet]) -> Jet:
    """Evaluate over the jet ring; env maps variable names to jets."""
    if isinstance(e, Const):
        space = next(iter(env.values())).space
        return jets.constant(space, e.value)
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ExprError(f"unknown variable {e.name!r}") from None
    if isinstance(e, Unary):
        arg = evaluate(e.arg, env)
        if e.op == "neg":
            return -arg
        return getattr(jets, e.op)(arg)
    if isinstance(e, Power):
        return jets.powi(evaluate(e.base, env), e.exponent)
    left, right = evaluate(e.left, env), evaluate(e.right, env)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    return left / right
