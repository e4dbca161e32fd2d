"""Coefficient expressions in (x, y) with forward-mode first derivatives.

Grammar, loosest binding first::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom ('^' unary)?          # right associative
    atom  := NUMBER | 'x' | 'y' | FUNC '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

__all__ = [
    "Expr", "Num", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Call",
    "Jet2", "ParseError", "UnknownIdentifier", "EvalError", "DomainError",
    "FUNCTIONS", "parse_expr", "evaluate", "eval_jet", "fd_partials", "num",
]


class ParseError(ValueError):
    """Malformed expression text; ``offset`` is a 0-based character index."""

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class UnknownIdentifier(ParseError):
    pass


class EvalError(ArithmeticError):
    pass


class DomainError(EvalError):
    pass


class Jet2:
    """A value together with its partial derivatives in x and y."""

    __slots__ = ("value", "dx", "dy")

    def __init__(self, value: float, dx: float = 0.0, dy: float = 0.0):
        self.value = value
        self.dx = dx
        self.dy = dy

    def __repr__(self):
        return f"Jet2({self.value!r}, {self.dx!r}, {self.dy!r})"

    def __eq__(self, other):
        if not isinstance(other, Jet2):
            return NotImplemented
        return (self.value, self.dx, self.dy) == (other.value, other.dx, other.dy)

    def __iter__(self):
        yield self.value
        yield self.dx
        yield self.dy

    def __add__(self, o: Jet2) -> Jet2:
        return Jet2(self.value + o.value, self.dx + o.dx, self.dy + o.dy)

    def __sub__(self, o: Jet2) -> Jet2:
        return Jet2(self.value - o.value, self.dx - o.dx, self.dy - o.dy)

    def __neg__(self) -> Jet2:
        return Jet2(-self.value, -self.dx, -self.dy)

    def __mul__(self, o: Jet2) -> Jet2:
        a, b = self.value, o.value
        return Jet2(a * b, a * o.dx + b * self.dx, a * o.dy + b * self.dy)

    def __truediv__(self, o: Jet2) -> Jet2:
        b = o.value
        if b == 0.0:
            raise DomainError("division by zero")
        q = self.value / b
        return Jet2(q, (self.dx - q * o.dx) / b, (self.dy - q * o.dy) / b)

    def scale(self, c: float) -> Jet2:
        return Jet2(c * self.value, c * self.dx, c * self.dy)

    def chain(self, f: float, df: float) -> Jet2:
        """Apply an outer function with value ``f`` and derivative ``df``."""
        return Jet2(f, df * self.dx, df * self.dy)


# name -> (value, derivative given (argument, value)); domain checks live in
# _checked so the value-only and jet paths reject the same inputs.
def _dlog(a, f):
    return 1.0 / a


def _dsqrt(a, f):
    if f == 0.0:
        raise DomainError("sqrt is not differentiable at 0")
    return 0.5 / f


def _dabs(a, f):
    if a == 0.0:
        raise DomainError("abs is not differentiable at 0")
    return 1.0 if a > 0.0 else -1.0


FUNCTIONS: dict[str, tuple[Callable[[float], float], Callable[[float, float], float]]] = {
    "sin": (math.sin, lambda a, f: math.cos(a)),
    "cos": (math.cos, lambda a, f: -math.sin(a)),
    "tan": (math.tan, lambda a, f: 1.0 + f * f),
    "exp": (math.exp, lambda a, f: f),
    "log": (math.log, _dlog),
    "sqrt": (math.sqrt, _dsqrt),
    "tanh": (math.tanh, lambda a, f: 1.0 - f * f),
    "abs": (abs, _dabs),
}


def _checked(name: str, a: float) -> float:
    if name == "log" and a <= 0.0:
        raise DomainError(f"log of non-positive argument {a!r}")
    if name == "sqrt" and a < 0.0:
        raise DomainError(f"sqrt of negative argument {a!r}")
    try:
        return FUNCTIONS[name][0](a)
    except (OverflowError, ValueError) as exc:
        raise DomainError(f"{name}({a!r}): {exc}") from None


class Expr:
    """Base class of the expression tree.  Nodes are immutable."""

    def value(self, x: float, y: float) -> float:
        raise NotImplementedError

    def jet(self, x: float, y: float) -> Jet2:
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Expr):
    v: float

    def __post_init__(self):
        object.__setattr__(self, "v", float(self.v))

    def __str__(self):
        return repr(self.v)

    def value(self, x, y):
        return self.v

    def jet(self, x, y):
        return Jet2(self.v)

    @property
    def is_constant(self):
        return True


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if self.name not in ("x", "y"):
            raise ValueError(f"unknown variable {self.name!r}")

    def __str__(self):
        return self.name

    def value(self, x, y):
        return x if self.name == "x" else y

    def jet(self, x, y):
        if self.name == "x":
            return Jet2(x, 1.0, 0.0)
        return Jet2(y, 0.0, 1.0)

    @property
    def is_constant(self):
        return False


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def __str__(self):
        return f"(-{self.arg})"

    def value(self, x, y):
        return -self.arg.value(x, y)

    def jet(self, x, y):
        return -self.arg.jet(x, y)

    @property
    def is_constant(self):
        return self.arg.is_constant


@dataclass(frozen=True)
class _Binary(Expr):
    left: Expr
    right: Expr
    symbol = "?"

    def __str__(self):
        return f"({self.left} {self.symbol} {self.right})"

    @property
    def is_constant(self):
        return self.left.is_constant and self.right.is_constant


class Add(_Binary):
    symbol = "+"

    def value(self, x, y):
        return self.left.value(x, y) + self.right.value(x, y)

    def jet(self, x, y):
        return self.left.jet(x, y) + self.right.jet(x, y)


class Sub(_Binary):
    symbol = "-"

    def value(self, x, y):
        return self.left.value(x, y) - self.right.value(x, y)

    def jet(self, x, y):
        return self.left.jet(x, y) - self.right.jet(x, y)


class Mul(_Binary):
    symbol = "*"

    def value(self, x, y):
        return self.left.value(x, y) * self.right.value(x, y)

    def jet(self, x, y):
        return self.left.jet(x, y) * self.right.jet(x, y)


class Div(_Binary):
    symbol = "/"

    def value(self, x, y):
        b = self.right.value(x, y)
        if b == 0.0:
            raise DomainError("division by zero")
        return self.left.value(x, y) / b

    def jet(self, x, y):
        return self.left.jet(x, y) / self.right.jet(x, y)


def _power(a: float, p: float) -> float:
    try:
        r = a ** p
    except ZeroDivisionError:
        raise DomainError(f"{a!r} ^ {p!r}: division by zero") from None
    except OverflowError:
        raise DomainError(f"{a!r} ^ {p!r} overflows") from None
    if isinstance(r, complex):
        raise DomainError(f"{a!r} ^ {p!r} is not real")
    return r


@dataclass(frozen=True)
class Pow(_Binary):
    """``left ^ right``.

    A constant integer exponent is valid for any base.  Any other exponent
    needs a positive base (a zero base is allowed for constant exponents
    that keep the value finite).
    """

    symbol = "^"
    _exponent: float | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.right.is_constant:
            try:
                p = float(self.right.value(0.0, 0.0))
            except EvalError:
                p = math.nan
            object.__setattr__(self, "_exponent", p)

    def _constant_exponent(self):
        p = self._exponent
        if p is not None and not math.isfinite(p):
            raise DomainError(f"invalid constant exponent {self.right}")
        return p

    def value(self, x, y):
        a = self.left.value(x, y)
        p = self._constant_exponent()
        if p is None:
            p = self.right.value(x, y)
            if a <= 0.0:
                raise DomainError(f"variable exponent needs a positive base, got {a!r}")
        elif a < 0.0 and not p.is_integer():
            raise DomainError(f"negative base {a!r} with non-integer exponent {p!r}")
        if p.is_integer() and abs(p) < 2**31:
            return _power(a, int(p))
        return _power(a, p)

    def jet(self, x, y):
        base = self.left.jet(x, y)
        a = base.value
        p = self._constant_exponent()
        if p is None:
            if a <= 0.0:
                raise DomainError(f"variable exponent needs a positive base, got {a!r}")
            ex = self.right.jet(x, y)
            la = math.log(a)
            f = _power(a, ex.value)
            # d(a^b) = a^b * (b' log a + b a'/a)
            return Jet2(
                f,
                f * (ex.dx * la + ex.value * base.dx / a),
                f * (ex.dy * la + ex.value * base.dy / a),
            )
        if p.is_integer() and abs(p) < 2**31:
            n = int(p)
            if n == 0:
                return Jet2(1.0)
            return base.chain(_power(a, n), n * _power(a, n - 1))
        if a < 0.0 or (a == 0.0 and p < 1.0):
            raise DomainError(f"{a!r} ^ {p!r} is not differentiable")
        return base.chain(_power(a, p), p * _power(a, p - 1.0))


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")

    def __str__(self):
        return f"{self.func}({self.arg})"

    def value(self, x, y):
        return _checked(self.func, self.arg.value(x, y))

    def jet(self, x, y):
        inner = self.arg.jet(x, y)
        a = inner.value
        f = _checked(self.func, a)
        return inner.chain(f, FUNCTIONS[self.func][1](a, f))

    @property
    def is_constant(self):
        return self.arg.is_constant


def num(v: float) -> Expr:
    """Literal for ``v``; negative values become ``Neg(Num(-v))`` as the parser would build."""
    v = float(v)
    if v < 0.0 or (v == 0.0 and math.copysign(1.0, v) < 0.0):
        return Neg(Num(-v))
    return Num(v)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        what = "end of input" if tok[0] == "end" else repr(tok[1])
        return ParseError(f"{message}, found {what}", tok[2], self.text)

    def expect(self, op):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != op:
            raise self.error(f"expected {op!r}")
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            raise self.error("unexpected token")
        return e

    def expr(self):
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self):
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            right = self.unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.advance()
            arg = self.unary()
            return Neg(arg) if tok[1] == "-" else arg
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return Pow(base, self.unary())
        return base

    def atom(self):
        tok = self.peek()
        kind, text, pos = tok
        if kind == "num":
            self.advance()
            return Num(float(text))
        if kind == "name":
            self.advance()
            if text in ("x", "y"):
                return Var(text)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise UnknownIdentifier(f"unknown identifier {text!r}", pos, self.text)
        if kind == "op" and text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        raise self.error("expected a number, variable, function call or '('")


def parse_expr(text: str) -> Expr:
    return _Parser(text).parse()


def _finite(v: float, what: str) -> float:
    if not math.isfinite(v):
        raise DomainError(f"non-finite {what}")
    return v


def evaluate(e: Expr, x: float, y: float) -> float:
    return _finite(e.value(float(x), float(y)), "value")


def eval_jet(e: Expr, x: float, y: float) -> Jet2:
    j = e.jet(float(x), float(y))
    _finite(j.value, "value")
    _finite(j.dx, "x-derivative")
    _finite(j.dy, "y-derivative")
    return j


def fd_partials(e: Expr, x: float, y: float, h: float = 1e-5) -> tuple[float, float]:
    """Central-difference partial derivatives; an oracle independent of :func:`eval_jet`."""
    if not h > 0.0:
        raise ValueError("step h must be positive")
    dx = (evaluate(e, x + h, y) - evaluate(e, x - h, y)) / (2.0 * h)
    dy = (evaluate(e, x, y + h) - evaluate(e, x, y - h)) / (2.0 * h)
    return dx, dy
