"""Univariate expression trees, their text grammar, and evaluators.

Grammar accepted by :func:`parse_expression`::

    expr     := term (("+" | "-") term)*
    term     := "-" term | factor (("*" | "/") factor)*
    factor   := "-" factor | atom ("^" exponent)*
    atom     := number | "x" | "ln" "(" expr ")" | "sqrt" "(" expr ")"
              | "(" "-" number ")" | "(" expr ")"
    exponent := integer | "(" ["-"] number ")"
    number   := integer | decimal | integer "/" integer   (no spaces)

A leading minus binds looser than ``*`` and ``/`` so ``-x * y`` reads as
``-(x * y)``; after an operator it binds to the next factor. ``^`` chains are
right-associative and their literal exponents are folded. ``(-2)`` is a
negative literal, and ``sqrt(e)`` is shorthand for ``e^(1/2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .numeric import (
    DivisionByZero,
    DivisorContainsZero,
    RatInterval,
    bits_for,
    exact_root,
    exp_enclosure,
    format_rational,
    ln_enclosure,
    nth_root_enclosure,
    rational,
    rational_power_interval,
    refine,
)


class ExpressionError(ValueError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifier(ExpressionSyntaxError):
    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier {name!r}", position)
        self.name = name


class IrrationalValue(ExpressionError):
    """The exact value is not rational; use an enclosure instead."""


class DomainViolation(ExpressionError):
    pass


# -- AST ---------------------------------------------------------------------


class Expr:
    """Base class; subclasses are frozen dataclasses with structural equality."""

    __slots__ = ()

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, exponent):
        exponent = rational(exponent)
        if exponent.denominator == 1:
            return PowInt(self, int(exponent))
        return PowRat(self, exponent)

    def __str__(self) -> str:
        return format_expression(self)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", rational(self.value))


@dataclass(frozen=True, eq=True)
class Var(Expr):
    pass


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class PowInt(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if isinstance(self.exponent, bool) or not isinstance(self.exponent, int):
            raise TypeError("PowInt exponent must be an int")


@dataclass(frozen=True, eq=True)
class PowRat(Expr):
    base: Expr
    exponent: Fraction

    def __post_init__(self):
        e = rational(self.exponent)
        if e.denominator == 1:
            raise ValueError("PowRat exponent must be a non-integer rational")
        object.__setattr__(self, "exponent", e)


@dataclass(frozen=True, eq=True)
class Ln(Expr):
    arg: Expr


X = Var()


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Const(rational(value))


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Add, Sub, Mul, Div)):
        return (e.left, e.right)
    if isinstance(e, (Neg, Ln)):
        return (e.arg,)
    if isinstance(e, (PowInt, PowRat)):
        return (e.base,)
    return ()


def walk(e: Expr) -> Iterator[Expr]:
    yield e
    for c in children(e):
        yield from walk(c)


def contains_var(e: Expr) -> bool:
    return any(isinstance(n, Var) for n in walk(e))


def is_polynomial_free(e: Expr) -> bool:
    """True when no PowRat or Ln node occurs (a rational function of x)."""
    return not any(isinstance(n, (PowRat, Ln)) for n in walk(e))


def substitute(e: Expr, replacement: Expr) -> Expr:
    """Replace every occurrence of x by ``replacement``."""
    if isinstance(e, Var):
        return replacement
    if isinstance(e, Const):
        return e
    if isinstance(e, (Add, Sub, Mul, Div)):
        return type(e)(substitute(e.left, replacement), substitute(e.right, replacement))
    if isinstance(e, (Neg, Ln)):
        return type(e)(substitute(e.arg, replacement))
    if isinstance(e, PowInt):
        return PowInt(substitute(e.base, replacement), e.exponent)
    if isinstance(e, PowRat):
        return PowRat(substitute(e.base, replacement), e.exponent)
    raise TypeError(f"not an expression: {e!r}")


# -- lexer -------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<rat>\d+/\d+)(?![\d.])"
    r"|(?P<num>\d+(?:\.\d+)?|\.\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: int
    value: Fraction | None = None


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        tok = m.group(m.lastgroup)
        end = m.end()
        if m.lastgroup == "rat" and tokens and tokens[-1].text == "^":
            # x^2/6 is (x^2)/6: exponents take a bare integer
            tok = tok.partition("/")[0]
            end = start + len(tok)
        if m.lastgroup in ("rat", "num"):
            try:
                value = Fraction(tok)
            except ZeroDivisionError:
                raise ExpressionSyntaxError("zero denominator in literal", start) from None
            tokens.append(_Token("num", tok, start, value))
        else:
            tokens.append(_Token(m.lastgroup, tok, start))
        pos = end
    tokens.append(_Token("end", "", n))
    return tokens


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> _Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def expect(self, text: str) -> None:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise ExpressionSyntaxError(f"expected {text!r}, found {found!r}", self.tok.pos)
        self.i += 1

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        if self.at("-"):
            self.i += 1
            return Neg(self.term())
        e = self.factor()
        while self.at("*") or self.at("/"):
            op = self.tok.text
            self.i += 1
            rhs = self.factor()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def factor(self) -> Expr:
        if self.at("-"):
            self.i += 1
            return Neg(self.factor())
        base = self.atom()
        if not self.at("^"):
            return base
        exponents = []
        while self.at("^"):
            self.i += 1
            exponents.append(self.exponent())
        value = exponents[-1]
        for e in reversed(exponents[:-1]):
            if value.denominator != 1:
                raise ExpressionSyntaxError("non-integer exponent inside a ^ chain", self.tok.pos)
            if e == 0 and value < 0:
                raise ExpressionSyntaxError("zero to a negative power in exponent", self.tok.pos)
            value = e ** int(value)
        return base ** value

    def exponent(self) -> Fraction:
        tok = self.tok
        if tok.kind == "num":
            if tok.value.denominator != 1 or "." in tok.text:
                raise ExpressionSyntaxError("fractional exponents need parentheses", tok.pos)
            self.i += 1
            return tok.value
        if self.at("("):
            self.i += 1
            sign = 1
            if self.at("-"):
                sign = -1
                self.i += 1
            if self.tok.kind != "num":
                raise ExpressionSyntaxError("expected a numeric exponent", self.tok.pos)
            value = self.tok.value
            self.i += 1
            if self.at("/"):
                self.i += 1
                if self.tok.kind != "num" or self.tok.value == 0:
                    raise ExpressionSyntaxError("expected a nonzero denominator", self.tok.pos)
                value = value / self.tok.value
                self.i += 1
            self.expect(")")
            return sign * value
        raise ExpressionSyntaxError("expected an exponent", tok.pos)

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(tok.value)
        if tok.kind == "ident":
            self.i += 1
            if tok.text == "x":
                return X
            if tok.text in ("ln", "sqrt"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Ln(arg) if tok.text == "ln" else PowRat(arg, Fraction(1, 2))
            raise UnknownIdentifier(tok.text, tok.pos)
        if self.at("("):
            # "(" "-" number ")" is a negative literal
            if (
                self.peek(1).kind == "op"
                and self.peek(1).text == "-"
                and self.peek(2).kind == "num"
                and self.peek(3).kind == "op"
                and self.peek(3).text == ")"
            ):
                value = -self.peek(2).value
                self.i += 4
                return Const(value)
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        found = tok.text or "end of input"
        raise ExpressionSyntaxError(f"unexpected {found!r}", tok.pos)


def parse_expression(text: str) -> Expr:
    return _Parser(text).parse()


# -- formatter ---------------------------------------------------------------


def _fmt_const(c: Fraction) -> str:
    if c < 0:
        return f"(-{format_rational(-c)})"
    return format_rational(c)


def _fmt_neg(e: Neg) -> str:
    if isinstance(e.arg, Const):
        return f"-({_fmt_const(e.arg.value)})"
    return "-" + _fmt_term(e.arg)


def _fmt_expr(e: Expr) -> str:
    if isinstance(e, Add):
        return f"{_fmt_expr(e.left)} + {_fmt_operand(e.right)}"
    if isinstance(e, Sub):
        return f"{_fmt_expr(e.left)} - {_fmt_operand(e.right)}"
    return _fmt_term(e)


def _fmt_operand(e: Expr) -> str:
    # right operand of + or -
    if isinstance(e, Neg):
        return f"({_fmt_neg(e)})"
    return _fmt_term(e)


def _fmt_term(e: Expr) -> str:
    if isinstance(e, Neg):
        return _fmt_neg(e)
    if isinstance(e, (Mul, Div)):
        left = e.left
        if isinstance(left, Neg):
            lhs = f"({_fmt_neg(left)})"
        else:
            lhs = _fmt_term(left)
        op = "*" if isinstance(e, Mul) else "/"
        right = e.right
        if isinstance(e, Div) and isinstance(right, Const) and right.value.denominator != 1 and right.value > 0:
            rhs = f"({format_rational(right.value)})"
        else:
            rhs = _fmt_factor(right)
        return f"{lhs} {op} {rhs}"
    if isinstance(e, (Add, Sub)):
        return f"({_fmt_expr(e)})"
    return _fmt_factor(e)


def _fmt_factor(e: Expr) -> str:
    if isinstance(e, Neg):
        return f"({_fmt_neg(e)})"
    if isinstance(e, (Add, Sub, Mul, Div)):
        return f"({_fmt_expr(e)})"
    if isinstance(e, PowInt):
        exp = str(e.exponent) if e.exponent >= 0 else f"(-{-e.exponent})"
        return f"{_fmt_base(e.base)}^{exp}"
    if isinstance(e, PowRat):
        exp = e.exponent
        inner = f"-{format_rational(-exp)}" if exp < 0 else format_rational(exp)
        return f"{_fmt_base(e.base)}^({inner})"
    return _fmt_atom(e)


def _fmt_base(e: Expr) -> str:
    if isinstance(e, Var) or isinstance(e, Ln):
        return _fmt_atom(e)
    if isinstance(e, Const):
        if e.value >= 0 and e.value.denominator == 1:
            return _fmt_const(e.value)
        if e.value < 0:
            return _fmt_const(e.value)
        return f"({format_rational(e.value)})"
    if isinstance(e, Neg):
        return f"({_fmt_neg(e)})"
    return f"({_fmt_expr(e)})"


def _fmt_atom(e: Expr) -> str:
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Ln):
        return f"ln({_fmt_expr(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")


def format_expression(e: Expr) -> str:
    return _fmt_expr(e)


# -- exact evaluation --------------------------------------------------------


def _exact_power(base: Fraction, r: Fraction) -> Fraction:
    p, q = r.numerator, r.denominator
    if base == 0:
        if p < 0:
            raise DivisionByZero("zero to a negative power")
        return Fraction(0)
    if base < 0 and q % 2 == 0:
        raise DomainViolation(f"even root of negative value {base}")
    root = exact_root(base, q)
    if root is None:
        raise IrrationalValue(f"{format_rational(base)}^({format_rational(r)}) is irrational")
    return root ** p


def evaluate_exact(e: Expr, x) -> Fraction:
    """Exact value of ``e`` at rational ``x``.

    Raises :class:`IrrationalValue` when a root or logarithm leaves the
    rationals, :class:`DivisionByZero` on a zero divisor, and
    :class:`DomainViolation` for ln of non-positives or even roots of negatives.
    """
    x = rational(x)

    def ev(n: Expr) -> Fraction:
        if isinstance(n, Const):
            return n.value
        if isinstance(n, Var):
            return x
        if isinstance(n, Add):
            return ev(n.left) + ev(n.right)
        if isinstance(n, Sub):
            return ev(n.left) - ev(n.right)
        if isinstance(n, Neg):
            return -ev(n.arg)
        if isinstance(n, Mul):
            return ev(n.left) * ev(n.right)
        if isinstance(n, Div):
            d = ev(n.right)
            if d == 0:
                raise DivisionByZero("division by zero")
            return ev(n.left) / d
        if isinstance(n, PowInt):
            b = ev(n.base)
            if b == 0 and n.exponent < 0:
                raise DivisionByZero("zero to a negative power")
            return b ** n.exponent
        if isinstance(n, PowRat):
            return _exact_power(ev(n.base), n.exponent)
        if isinstance(n, Ln):
            a = ev(n.arg)
            if a <= 0:
                raise DomainViolation(f"ln of non-positive value {a}")
            if a == 1:
                return Fraction(0)
            raise IrrationalValue(f"ln({format_rational(a)}) is irrational")
        raise TypeError(f"not an expression: {n!r}")

    return ev(e)


def try_exact(e: Expr, x) -> Fraction | None:
    try:
        return evaluate_exact(e, x)
    except IrrationalValue:
        return None


# -- enclosure evaluation ----------------------------------------------------


def _enclose(e: Expr, xi: RatInterval, bits: int) -> RatInterval:
    tol = Fraction(1, 1 << bits)

    def ev(n: Expr) -> RatInterval:
        if isinstance(n, Const):
            return RatInterval.point(n.value)
        if isinstance(n, Var):
            return xi
        if isinstance(n, Add):
            r = ev(n.left) + ev(n.right)
        elif isinstance(n, Sub):
            r = ev(n.left) - ev(n.right)
        elif isinstance(n, Neg):
            return -ev(n.arg)
        elif isinstance(n, Mul):
            r = ev(n.left) * ev(n.right)
        elif isinstance(n, Div):
            d = ev(n.right)
            if d.contains_zero():
                raise DivisorContainsZero(f"divisor enclosure {d} contains zero")
            r = ev(n.left) / d
        elif isinstance(n, PowInt):
            b = ev(n.base)
            if n.exponent < 0 and b.contains_zero():
                raise DivisorContainsZero(f"negative power of {b}")
            r = b ** n.exponent
        elif isinstance(n, PowRat):
            b = ev(n.base)
            if n.exponent.denominator % 2 == 0 and b.lo < 0:
                raise DomainViolation(f"even root of enclosure {b} reaching below zero")
            if n.exponent < 0 and b.contains_zero():
                raise DivisorContainsZero(f"negative power of {b}")
            r = rational_power_interval(b, n.exponent, tol)
        elif isinstance(n, Ln):
            a = ev(n.arg)
            if a.lo <= 0:
                raise DomainViolation(f"ln of enclosure {a} reaching zero or below")
            r = ln_enclosure(a, tol)
        else:
            raise TypeError(f"not an expression: {n!r}")
        return r.tame(bits)

    return ev(e)


def evaluate_enclosure(e: Expr, x, eps=Fraction(1, 10**12)) -> RatInterval:
    """Enclosure of ``{e(t) : t in x}``.

    For point inputs the width is driven below ``eps``; for wider inputs the
    result is a single sound pass at the precision implied by ``eps``.
    """
    xi = x if isinstance(x, RatInterval) else RatInterval.point(x)
    eps = rational(eps)
    if xi.is_point:
        return refine(lambda bits: _enclose(e, xi, bits), eps)
    return _enclose(e, xi, bits_for(eps) + 8)


def evaluate_point(e: Expr, x, eps=Fraction(1, 10**12)) -> RatInterval:
    """Exact point interval when possible, else a tight enclosure."""
    v = try_exact(e, x)
    if v is not None:
        return RatInterval.point(v)
    return evaluate_enclosure(e, RatInterval.point(rational(x)), eps)


# -- float compilation (screening and plotting only) -------------------------


def to_float_function(e: Expr):
    """Vectorised numpy evaluator; returns nan outside the real domain."""

    def ev(n: Expr, x):
        if isinstance(n, Const):
            return np.full_like(x, float(n.value), dtype=float)
        if isinstance(n, Var):
            return x
        if isinstance(n, Add):
            return ev(n.left, x) + ev(n.right, x)
        if isinstance(n, Sub):
            return ev(n.left, x) - ev(n.right, x)
        if isinstance(n, Neg):
            return -ev(n.arg, x)
        if isinstance(n, Mul):
            return ev(n.left, x) * ev(n.right, x)
        if isinstance(n, Div):
            return ev(n.left, x) / ev(n.right, x)
        if isinstance(n, PowInt):
            return ev(n.base, x) ** float(n.exponent)
        if isinstance(n, PowRat):
            b = ev(n.base, x)
            p, q = n.exponent.numerator, n.exponent.denominator
            if q % 2 == 1:
                root = np.sign(b) * np.abs(b) ** (1.0 / q)
            else:
                root = np.where(b >= 0, np.abs(b) ** (1.0 / q), np.nan)
            return root ** float(p)
        if isinstance(n, Ln):
            a = ev(n.arg, x)
            return np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), np.nan)
        raise TypeError(f"not an expression: {n!r}")

    def call(x):
        arr = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return ev(e, arr)

    return call


# -- symbolic inversion ------------------------------------------------------


def invert_enclosure(e: Expr, y: Fraction, eps, prefer_negative: bool = False) -> RatInterval:
    """Enclosure of the x with e(x) = y, for e containing x exactly once.

    Even powers pick the non-negative branch unless ``prefer_negative``.
    Raises :class:`ExpressionError` when e is not invertible this way or y
    is outside its range.
    """
    eps = rational(eps)
    tol = eps / 64
    path_y = RatInterval.point(rational(y))
    node = e
    while not isinstance(node, Var):
        if isinstance(node, (Add, Sub, Mul, Div)):
            lx, rx = contains_var(node.left), contains_var(node.right)
            if lx == rx:
                raise ExpressionError("x must occur exactly once")
            other = evaluate_enclosure(node.right if lx else node.left, RatInterval.point(0), tol)
            if isinstance(node, Add):
                path_y = path_y - other
            elif isinstance(node, Sub):
                path_y = path_y + other if lx else other - path_y
            elif isinstance(node, Mul):
                if other.contains_zero():
                    raise ExpressionError("multiplier vanishes")
                path_y = path_y / other
            else:
                if lx:
                    path_y = path_y * other
                else:
                    if path_y.contains_zero():
                        raise ExpressionError("value outside the range")
                    path_y = other / path_y
            node = node.left if lx else node.right
        elif isinstance(node, Neg):
            path_y = -path_y
            node = node.arg
        elif isinstance(node, (PowInt, PowRat)):
            r = Fraction(node.exponent)
            if r == 0:
                raise ExpressionError("zeroth power is not invertible")
            inv = 1 / r
            p = inv.numerator
            # t^r = Y  =>  t = Y^(1/r), with the sign branch for even r numerators
            even_branch = r.numerator % 2 == 0
            base = path_y
            if even_branch or r.denominator % 2 == 0:
                if base.hi < 0:
                    raise ExpressionError("value outside the range")
                base = RatInterval(max(base.lo, Fraction(0)), base.hi)
            if p < 0 and base.contains_zero():
                raise ExpressionError("value outside the range")
            t = rational_power_interval(base, inv, tol)
            if even_branch and prefer_negative:
                t = -t
            path_y = t
            node = node.base
        elif isinstance(node, Ln):
            path_y = exp_enclosure(path_y, tol)
            node = node.arg
        else:
            raise ExpressionError("constant expression is not invertible")
    return path_y


# -- quadratic surds and domains ---------------------------------------------


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s^2 * t with t free of small square factors."""
    s, t = 1, n
    p = 2
    while p * p <= t and p < 100000:
        while t % (p * p) == 0:
            t //= p * p
            s *= p
        p += 1 if p == 2 else 2
    r = math.isqrt(t)
    if r * r == t:
        s *= r
        t = 1
    return s, t


@dataclass(frozen=True)
class Surd:
    """An exact real number ``rational + coeff * sqrt(radicand)``."""

    rational: Fraction
    coeff: Fraction
    radicand: int

    def __post_init__(self):
        object.__setattr__(self, "rational", Fraction(self.rational))
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        if self.radicand < 2 or self.coeff == 0:
            raise ValueError("use a Fraction for rational values")

    def enclosure(self, eps) -> RatInterval:
        eps = rational(eps)
        c = abs(self.coeff)
        root = nth_root_enclosure(self.radicand, 2, eps / c)
        return self.rational + self.coeff * root

    def __float__(self) -> float:
        return float(self.rational) + float(self.coeff) * math.sqrt(self.radicand)

    def __str__(self) -> str:
        c = self.coeff
        if c == 1:
            s = f"sqrt({self.radicand})"
        elif c == -1:
            s = f"-sqrt({self.radicand})"
        else:
            s = f"{format_rational(c)}*sqrt({self.radicand})"
        r = self.rational
        if r > 0:
            s += f" + {format_rational(r)}"
        elif r < 0:
            s += f" - {format_rational(-r)}"
        return s


def sqrt_of(q) -> "Fraction | Surd":
    q = rational(q)
    if q <= 0:
        raise ValueError("sqrt_of requires a positive argument")
    s, t = _squarefree_split(q.numerator * q.denominator)
    coeff = Fraction(s, q.denominator)
    if t == 1:
        return coeff
    return Surd(Fraction(0), coeff, t)


def _surd_parts(v) -> tuple[Fraction, Fraction, int]:
    if isinstance(v, Surd):
        return v.rational, v.coeff, v.radicand
    return rational(v), Fraction(0), 1


def _make_surd(r: Fraction, c: Fraction, q: int):
    if c == 0 or q == 1:
        return r + (c if q == 1 else 0)
    return Surd(r, c, q)


def real_sign(v) -> int:
    """Exact sign of a rational or surd."""
    a, b, q = _surd_parts(v)
    if b == 0:
        return (a > 0) - (a < 0)
    sa, sb = (a > 0) - (a < 0), 1 if b > 0 else -1
    if sa == 0 or sa == sb:
        return sb
    # a and b*sqrt(q) have opposite signs; the larger magnitude wins
    big = a * a - b * b * q
    return sa if big > 0 else sb


def real_compare(u, v) -> int:
    """-1, 0 or 1 as u <, =, > v, exactly."""
    a1, b1, q1 = _surd_parts(u)
    a2, b2, q2 = _surd_parts(v)
    if b1 == 0 or b2 == 0 or q1 == q2:
        q = q1 if b1 != 0 else q2
        return real_sign(_make_surd(a1 - a2, b1 - b2, q))
    # distinct radicands: the numbers differ, so enclosures separate eventually
    eps = Fraction(1, 1 << 20)
    while True:
        iu, iv = u.enclosure(eps), v.enclosure(eps)
        if iu.hi < iv.lo:
            return -1
        if iv.hi < iu.lo:
            return 1
        eps /= 1 << 20


def real_lower(v, eps) -> Fraction:
    """Rational lower bound of ``v`` within ``eps``."""
    return v.enclosure(eps).lo if isinstance(v, Surd) else v


def real_upper(v, eps) -> Fraction:
    return v.enclosure(eps).hi if isinstance(v, Surd) else v


def format_real(v) -> str:
    return str(v) if isinstance(v, Surd) else format_rational(v)


def _surd_value(e: Expr):
    """Evaluate a constant expression built from rationals and sqrt into Q(sqrt q)."""
    if contains_var(e):
        raise ExpressionError("domain endpoints must be constant")
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Neg):
        a, b, q = _surd_parts(_surd_value(e.arg))
        return _make_surd(-a, -b, q)
    if isinstance(e, (Add, Sub)):
        a1, b1, q1 = _surd_parts(_surd_value(e.left))
        a2, b2, q2 = _surd_parts(_surd_value(e.right))
        if isinstance(e, Sub):
            a2, b2 = -a2, -b2
        if b1 != 0 and b2 != 0 and q1 != q2:
            raise ExpressionError("endpoints may use a single square root")
        return _make_surd(a1 + a2, b1 + b2, q1 if b1 != 0 else q2)
    if isinstance(e, (Mul, Div)):
        left, right = _surd_value(e.left), _surd_value(e.right)
        if isinstance(e, Div):
            if isinstance(right, Surd):
                raise ExpressionError("cannot divide by a square root in an endpoint")
            if right == 0:
                raise ExpressionError("division by zero in an endpoint")
            right = 1 / right
        if isinstance(left, Surd) and isinstance(right, Surd):
            raise ExpressionError("endpoint products of square roots are not supported")
        if isinstance(right, Surd):
            left, right = right, left
        a, b, q = _surd_parts(left)
        return _make_surd(a * right, b * right, q)
    if isinstance(e, PowRat) and e.exponent == Fraction(1, 2):
        inner = _surd_value(e.base)
        if isinstance(inner, Surd):
            raise ExpressionError("nested square roots are not supported")
        return sqrt_of(inner)
    if isinstance(e, PowInt) and not isinstance(_surd_value(e.base), Surd):
        b = _surd_value(e.base)
        if b == 0 and e.exponent < 0:
            raise ExpressionError("division by zero in an endpoint")
        return b ** e.exponent
    raise ExpressionError(f"unsupported endpoint expression {format_expression(e)!r}")


def parse_real(text: str):
    return _surd_value(parse_expression(text))


@dataclass(frozen=True)
class DomainInterval:
    """An interval of the real line; ``None`` endpoints are infinite."""

    lower: "Fraction | Surd | None"
    upper: "Fraction | Surd | None"
    lower_open: bool = False
    upper_open: bool = False

    def __post_init__(self):
        lo, hi = self.lower, self.upper
        if lo is not None and not isinstance(lo, Surd):
            lo = rational(lo)
        if hi is not None and not isinstance(hi, Surd):
            hi = rational(hi)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if lo is None:
            object.__setattr__(self, "lower_open", True)
        if hi is None:
            object.__setattr__(self, "upper_open", True)
        if lo is not None and hi is not None:
            c = real_compare(lo, hi)
            if c > 0 or (c == 0 and (self.lower_open or self.upper_open)):
                raise ValueError(f"empty domain {self}")

    @classmethod
    def closed(cls, lo, hi) -> "DomainInterval":
        return cls(lo, hi, False, False)

    @classmethod
    def open(cls, lo, hi) -> "DomainInterval":
        return cls(lo, hi, True, True)

    @classmethod
    def real_line(cls) -> "DomainInterval":
        return cls(None, None, True, True)

    @property
    def bounded(self) -> bool:
        return self.lower is not None and self.upper is not None

    @property
    def rational_endpoints(self) -> bool:
        return not isinstance(self.lower, Surd) and not isinstance(self.upper, Surd)

    def contains(self, x) -> bool:
        if self.lower is not None:
            c = real_compare(x, self.lower)
            if c < 0 or (c == 0 and self.lower_open):
                return False
        if self.upper is not None:
            c = real_compare(x, self.upper)
            if c > 0 or (c == 0 and self.upper_open):
                return False
        return True

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def closure_hull(self, eps=Fraction(1, 1 << 40)) -> RatInterval:
        """Smallest-ish rational interval containing the closure (bounded only)."""
        if not self.bounded:
            raise ValueError(f"domain {self} is unbounded")
        return RatInterval(real_lower(self.lower, eps), real_upper(self.upper, eps))

    def inner_hull(self, eps=Fraction(1, 1 << 40)) -> RatInterval:
        """A rational interval inside the closure, within eps of each endpoint."""
        if not self.bounded:
            raise ValueError(f"domain {self} is unbounded")
        return RatInterval(real_upper(self.lower, eps), real_lower(self.upper, eps))

    def intersect(self, other: "DomainInterval") -> "DomainInterval | None":
        lo, lo_open = self.lower, self.lower_open
        if other.lower is not None:
            if lo is None:
                lo, lo_open = other.lower, other.lower_open
            else:
                c = real_compare(other.lower, lo)
                if c > 0:
                    lo, lo_open = other.lower, other.lower_open
                elif c == 0:
                    lo_open = lo_open or other.lower_open
        hi, hi_open = self.upper, self.upper_open
        if other.upper is not None:
            if hi is None:
                hi, hi_open = other.upper, other.upper_open
            else:
                c = real_compare(other.upper, hi)
                if c < 0:
                    hi, hi_open = other.upper, other.upper_open
                elif c == 0:
                    hi_open = hi_open or other.upper_open
        if lo is not None and hi is not None:
            c = real_compare(lo, hi)
            if c > 0 or (c == 0 and (lo_open or hi_open)):
                return None
        return DomainInterval(lo, hi, lo_open, hi_open)

    def window(self, radius: Fraction) -> RatInterval:
        """Rational interval inside the closure, clipped to [-radius, radius] around finite ends."""
        radius = rational(radius)
        if self.lower is None and self.upper is None:
            return RatInterval(-radius, radius)
        if self.lower is None:
            hi = real_lower(self.upper, Fraction(1, 1 << 40))
            return RatInterval(hi - radius, hi)
        if self.upper is None:
            lo = real_upper(self.lower, Fraction(1, 1 << 40))
            return RatInterval(lo, lo + radius)
        return self.inner_hull()

    def interior_grid(self, n: int, radius=Fraction(10)) -> list[Fraction]:
        """The points a + i*(b-a)/n, 0 < i < n, of a rational window inside the domain."""
        w = self.window(radius)
        step = w.width / n
        return [w.lo + i * step for i in range(1, n) if self.contains(w.lo + i * step)]

    def probe_points(self, levels: int = 3) -> list[Fraction]:
        """Deterministic rational sample: grids, points near finite ends, far tails."""
        pts: list[Fraction] = []
        for level in range(1, levels + 1):
            pts.extend(self.interior_grid(10**level))
        for end, sign in ((self.lower, 1), (self.upper, -1)):
            if end is None:
                continue
            for k in range(1, 25):
                delta = Fraction(1, 2**k)
                if sign > 0:
                    p = real_upper(end, delta / 8) + delta
                else:
                    p = real_lower(end, delta / 8) - delta
                if self.contains(p):
                    pts.append(p)
            if isinstance(end, Fraction) and self.contains(end):
                pts.append(end)
        if self.lower is None and self.upper is not None:
            pts.extend(real_lower(self.upper, Fraction(1)) - 10**k for k in range(1, 7))
        if self.upper is None and self.lower is not None:
            pts.extend(real_upper(self.lower, Fraction(1)) + 10**k for k in range(1, 7))
        if self.lower is None and self.upper is None:
            pts.extend(s * 10**k for k in range(1, 7) for s in (1, -1))
        return sorted(set(p for p in pts if self.contains(p)))

    def __str__(self) -> str:
        left = "(" if self.lower_open else "["
        right = ")" if self.upper_open else "]"
        lo = "-inf" if self.lower is None else format_real(self.lower)
        hi = "+inf" if self.upper is None else format_real(self.upper)
        return f"{left}{lo}, {hi}{right}"


_DOMAIN = re.compile(r"^\s*([\[(])\s*(.+?)\s*,\s*(.+?)\s*([\])])\s*$")


def parse_domain(text: str) -> DomainInterval:
    """Parse ``"(0, 4)"``, ``"[0, +inf)"``, ``"(0, 2*sqrt(3))"`` or ``"R"``."""
    if text.strip() in ("R", "ℝ"):
        return DomainInterval.real_line()
    m = _DOMAIN.match(text)
    if not m:
        raise ExpressionError(f"malformed domain {text!r}")
    lb, lo_text, hi_text, rb = m.groups()
    lo = None if lo_text in ("-inf", "−inf", "-oo") else parse_real(lo_text)
    hi = None if hi_text in ("+inf", "inf", "+oo") else parse_real(hi_text)
    if lo is None and lb == "[" or hi is None and rb == "]":
        raise ExpressionError("infinite endpoints must be open")
    try:
        return DomainInterval(lo, hi, lb == "(", rb == ")")
    except ValueError as exc:
        raise ExpressionError(str(exc)) from None
