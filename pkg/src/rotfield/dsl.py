"""Chart expressions: a small recursive-descent parser evaluated over jets.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-')? power
    power  := atom ('^' factor)?
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-u^2``
is ``-(u^2)`` and ``u^-1`` is ``u^(-1)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .jets import Jet3, constant, seed_variable

__all__ = [
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Expr",
    "ParseError",
    "EvalError",
    "FUNCTIONS",
    "parse",
    "to_string",
    "free_names",
    "eval_jet",
    "eval_value",
]

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "exp", "sqrt", "ln", "atan")
COORDS = ("u", "v")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class EvalError(ValueError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            off = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[off]!r}", off, text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, names: set[str] | None):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.names = names

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind == "end":
            what = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {what}", off, self.text)

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.power())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if self.peek()[:2] == ("op", "("):
                if val not in FUNCTIONS:
                    raise ParseError(f"unknown function {val!r}", off, self.text)
                self.take()
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != 1:
                    raise ParseError(f"{val} takes 1 argument, got {len(args)}", off, self.text)
                return Call(val, args[0])
            if val in FUNCTIONS:
                raise ParseError(f"function {val!r} needs an argument list", off, self.text)
            if val == "pi":
                return Num(math.pi)
            if self.names is not None and val not in COORDS and val not in self.names:
                raise ParseError(f"unknown identifier {val!r}", off, self.text)
            return Var(val)
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {what}", off, self.text)


def parse(text: str, params=None) -> Expr:
    """Parse ``text``; if ``params`` is given, identifiers outside u, v, pi and ``params`` are rejected."""
    p = _Parser(text, None if params is None else set(params))
    node = p.expr()
    kind, val, off = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", off, text)
    return node


def to_string(node: Expr) -> str:
    """Fully parenthesised rendering; ``parse(to_string(e)) == e``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_string(node.arg)})"
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    return f"({to_string(node.left)}{node.op}{to_string(node.right)})"


def free_names(node: Expr) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return free_names(node.arg)
    if isinstance(node, Call):
        return free_names(node.arg)
    return free_names(node.left) | free_names(node.right)


def _depends_on_coords(node: Expr) -> bool:
    return bool(free_names(node) & set(COORDS))


def eval_jet(node: Expr, u0, v0, params=None) -> Jet3:
    """Jet of the expression at ``(u0, v0)``; parameters enter as constants."""
    params = params or {}
    u = seed_variable("u", u0, v0)
    v = u._like(seed_variable("v", u0, v0).c)
    return _eval(node, u, v, params)


def eval_value(node: Expr, u0, v0, params=None):
    return eval_jet(node, u0, v0, params).val


def _eval(node: Expr, u: Jet3, v: Jet3, params) -> Jet3:
    if isinstance(node, Num):
        return constant(node.value, u)
    if isinstance(node, Var):
        if node.name == "u":
            return u
        if node.name == "v":
            return v
        if node.name not in params:
            raise EvalError(f"unbound parameter {node.name!r}")
        return constant(params[node.name], u)
    if isinstance(node, Neg):
        return -_eval(node.arg, u, v, params)
    if isinstance(node, Call):
        arg = _eval(node.arg, u, v, params)
        return getattr(arg, "log" if node.func == "ln" else node.func)()
    left = _eval(node.left, u, v, params)
    if node.op == "^":
        if _depends_on_coords(node.right):
            return left ** _eval(node.right, u, v, params)
        p = _eval(node.right, u, v, params).val
        p = np.unique(p) if np.ndim(p) else p
        if np.ndim(p):
            p = p[0]
        if np.isreal(p) and float(np.real(p)).is_integer():
            return left.pow_int(int(np.real(p)))
        return left.pow_real(p) if np.isreal(p) else (left.log() * p).exp()
    right = _eval(node.right, u, v, params)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    return left / right
