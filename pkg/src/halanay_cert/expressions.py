"""Arithmetic expressions in the single variable ``t``.

Grammar (EBNF):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('-')? power
    power  := atom ('^' integer)?
    atom   := number | 'pi' | 't' | ident '(' expr (',' expr)? ')' | '(' expr ')'
    ident  in {sin, cos, tan, abs, tanh, arctan, floor, exp, min, max}

Evaluation accepts a scalar or a numpy array for ``t`` and is purely
functional; ASTs are immutable and safe to share across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Call",
    "ExprError",
    "EvaluationError",
    "parse_expr",
]


class ExprError(ValueError):
    """Syntax or name error while parsing, with the byte offset of the fault."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvaluationError(ArithmeticError):
    """Raised when evaluation hits division by zero or produces NaN."""


_UNARY_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "abs": np.abs,
    "tanh": np.tanh,
    "arctan": np.arctan,
    "floor": np.floor,
    "exp": np.exp,
}
_BINARY_FUNCS = {
    "min": np.minimum,
    "max": np.maximum,
}
KNOWN_FUNCTIONS = sorted(_UNARY_FUNCS) + sorted(_BINARY_FUNCS)


class Expr:
    """Base AST node.  Subclasses implement ``_eval`` and ``to_source``."""

    def __call__(self, t):
        """Evaluate at ``t`` (scalar or ndarray)."""
        with np.errstate(divide="raise", invalid="raise"):
            try:
                out = self._eval(t)
            except (FloatingPointError, ZeroDivisionError) as exc:
                raise EvaluationError(f"evaluation failed for {self.to_source()!r}: {exc}") from exc
        return out

    def _eval(self, t):
        raise NotImplementedError

    def to_source(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_source()!r})"


@dataclass(frozen=True, repr=False)
class Const(Expr):
    value: float

    def _eval(self, t):
        if isinstance(t, np.ndarray):
            return np.full(t.shape, self.value)
        return self.value

    def to_source(self):
        if self.value == math.pi:
            return "pi"
        return repr(self.value) if self.value != int(self.value) else str(int(self.value))


@dataclass(frozen=True, repr=False)
class Var(Expr):
    def _eval(self, t):
        return t

    def to_source(self):
        return "t"


@dataclass(frozen=True, repr=False)
class Neg(Expr):
    operand: Expr

    def _eval(self, t):
        return -self.operand._eval(t)

    def to_source(self):
        inner = self.operand.to_source()
        if isinstance(self.operand, (BinOp, Neg)):
            inner = f"({inner})"
        return f"-{inner}"


_OPS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
}
_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


@dataclass(frozen=True, repr=False)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def _eval(self, t):
        lhs = self.left._eval(t)
        rhs = self.right._eval(t)
        if self.op == "/" and not isinstance(rhs, np.ndarray) and rhs == 0:
            raise ZeroDivisionError("division by zero")
        return _OPS[self.op](lhs, rhs)

    def to_source(self):
        prec = _PRECEDENCE[self.op]

        def wrap(node, side):
            src = node.to_source()
            if isinstance(node, BinOp):
                p = _PRECEDENCE[node.op]
                # '-' and '/' are left associative: parenthesize equal
                # precedence on the right.
                if p < prec or (p == prec and side == "right" and self.op in "-/"):
                    return f"({src})"
            elif isinstance(node, Neg) and prec >= 2:
                return f"({src})"
            return src

        return f"{wrap(self.left, 'left')}{self.op}{wrap(self.right, 'right')}"


@dataclass(frozen=True, repr=False)
class Pow(Expr):
    base: Expr
    exponent: int

    def _eval(self, t):
        return self.base._eval(t) ** self.exponent

    def to_source(self):
        base = self.base.to_source()
        if isinstance(self.base, (BinOp, Neg, Pow)):
            base = f"({base})"
        return f"{base}^{self.exponent}"


@dataclass(frozen=True, repr=False)
class Call(Expr):
    name: str
    args: tuple

    def _eval(self, t):
        vals = [a._eval(t) for a in self.args]
        fn = _UNARY_FUNCS.get(self.name) or _BINARY_FUNCS[self.name]
        return fn(*vals)

    def to_source(self):
        return f"{self.name}({','.join(a.to_source() for a in self.args)})"


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            # skip trailing whitespace
            if source[pos:].strip() == "":
                break
            raise ExprError(f"unexpected character {source[pos]!r}", pos)
        if m.end() == m.start():
            break
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, off = self.peek()
        if text != value:
            raise ExprError(f"expected {value!r}, found {text or 'end of input'!r}", off)
        return self.next()

    def parse(self):
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprError(f"trailing input {text!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[1] == "-":
            self.next()
            return Neg(self.power())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[1] == "^":
            self.next()
            kind, text, off = self.next()
            if kind != "num" or not text.isdigit():
                raise ExprError("exponent must be a nonnegative integer", off)
            node = Pow(node, int(text))
        return node

    def atom(self):
        kind, text, off = self.next()
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            if text == "pi":
                return Const(math.pi)
            if text == "t":
                return Var()
            if text in _UNARY_FUNCS or text in _BINARY_FUNCS:
                self.expect("(")
                args = [self.expr()]
                if self.peek()[1] == ",":
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                want = 2 if text in _BINARY_FUNCS else 1
                if len(args) != want:
                    raise ExprError(f"{text} takes {want} argument(s)", off)
                return Call(text, tuple(args))
            raise ExprError(f"unknown identifier {text!r}", off)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprError(f"unexpected {text or 'end of input'!r}", off)


def parse_expr(source):
    """Parse ``source`` into an :class:`Expr`.

    Raises :class:`ExprError` with a byte offset on malformed input or
    unknown identifiers.
    """
    if not isinstance(source, str) or not source.strip():
        raise ExprError("empty expression", 0)
    return _Parser(source).parse()
