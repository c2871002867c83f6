"""Exact univariate polynomials, double-root deflation, Sturm chains and sign verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd as igcd
from typing import Sequence

from .expr import (
    Add,
    Const,
    DomainInterval,
    Expr,
    Mul,
    Neg,
    PowInt,
    Sub,
    Surd,
    X,
    format_expression,
    parse_expression,
    real_lower,
    real_sign,
    real_upper,
)
from .numeric import format_rational, rational


class DivisionByZeroPolynomial(ZeroDivisionError):
    pass


class NotDoubleRoot(ArithmeticError):
    def __init__(self, x0, stage: int, remainder: Fraction):
        super().__init__(f"x0 = {format_rational(x0)} is not a double root (stage {stage} remainder {format_rational(remainder)})")
        self.x0 = x0
        self.stage = stage
        self.remainder = remainder


@dataclass(frozen=True)
class Polynomial:
    """Coefficients from the constant term upward; the zero polynomial is ``()``."""

    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self):
        cs = [rational(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def of(cls, *coeffs) -> "Polynomial":
        return cls(tuple(coeffs))

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls((rational(c),))

    @classmethod
    def x(cls) -> "Polynomial":
        return cls((Fraction(0), Fraction(1)))

    @classmethod
    def from_roots(cls, *roots) -> "Polynomial":
        p = cls.constant(1)
        for r in roots:
            p = p * cls.of(-rational(r), 1)
        return p

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    @staticmethod
    def _coerce(other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial.constant(other)

    def __add__(self, other) -> "Polynomial":
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = o.coeffs + (Fraction(0),) * (n - len(o.coeffs))
        return Polynomial(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        o = self._coerce(other)
        if self.is_zero or o.is_zero:
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    out[i + j] += a * b
        return Polynomial(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other) -> tuple["Polynomial", "Polynomial"]:
        return divide_with_remainder(self, self._coerce(other))

    def __floordiv__(self, other) -> "Polynomial":
        return divmod(self, other)[0]

    def __mod__(self, other) -> "Polynomial":
        return divmod(self, other)[1]

    def scale(self, c) -> "Polynomial":
        c = rational(c)
        return Polynomial(tuple(c * a for a in self.coeffs))

    def __call__(self, x):
        """Horner evaluation at a rational, a :class:`Surd`, or a RatInterval."""
        if isinstance(x, Surd):
            return eval_surd(self, x)
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc if not isinstance(acc, int) else Fraction(acc)

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def monic(self) -> "Polynomial":
        if self.is_zero:
            return self
        return self.scale(1 / self.leading)

    def content(self) -> Fraction:
        """Positive rational c with self / c primitive with integer coefficients."""
        if self.is_zero:
            return Fraction(0)
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // igcd(den, c.denominator)
        num = 0
        for c in self.coeffs:
            num = igcd(num, int(c * den))
        return Fraction(num, den)

    def primitive(self) -> "Polynomial":
        """Integer coefficients with gcd 1 and positive leading coefficient."""
        if self.is_zero:
            return self
        c = self.content()
        if self.leading < 0:
            c = -c
        return self.scale(1 / c)

    def to_expr(self) -> Expr:
        """Expanded expression, highest degree first."""
        terms: list[tuple[Fraction, int]] = [(c, i) for i, c in enumerate(self.coeffs) if c]
        if not terms:
            return Const(0)
        expr = None
        for c, i in reversed(terms):
            mag = abs(c)
            if i == 0:
                mono: Expr = Const(mag)
            else:
                power = X if i == 1 else PowInt(X, i)
                mono = power if mag == 1 else Mul(Const(mag), power)
            if expr is None:
                expr = Neg(mono) if c < 0 else mono
            elif c < 0:
                expr = Sub(expr, mono)
            else:
                expr = Add(expr, mono)
        return expr

    def to_text(self) -> str:
        return format_expression(self.to_expr())

    def to_factored_text(self) -> str:
        """``c * (primitive)`` with c rational, e.g. ``1/27 * (2 * x^2 + 5 * x + 8)``."""
        if self.is_zero:
            return "0"
        prim = self.primitive()
        c = self.leading / prim.leading
        if prim.degree == 0:
            return format_expression(Const(c)) if c >= 0 else f"-{format_rational(-c)}"
        body = prim.to_text()
        if c == 1:
            return body
        if c == -1:
            return f"-({body})"
        if c < 0:
            return f"-{format_rational(-c)} * ({body})"
        return f"{format_rational(c)} * ({body})"

    def __str__(self) -> str:
        return self.to_text()


def eval_surd(p: Polynomial, s: Surd) -> "Fraction | Surd":
    """Exact value of p at r + c*sqrt(q), computed in Q(sqrt q)."""
    q = s.radicand
    a, b = Fraction(0), Fraction(0)
    for c in reversed(p.coeffs):
        # (a + b t) * (r + c' t) with t^2 = q
        a, b = a * s.rational + b * s.coeff * q + c, a * s.coeff + b * s.rational
    if b == 0:
        return a
    return Surd(a, b, q)


def poly_arithmetic(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    if op == "+":
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×"):
        return a * b
    raise ValueError(f"unknown operator {op!r}")


def divide_with_remainder(a: Polynomial, b: Polynomial) -> tuple[Polynomial, Polynomial]:
    if b.is_zero:
        raise DivisionByZeroPolynomial("division by the zero polynomial")
    rem = list(a.coeffs)
    db = b.degree
    lead = b.leading
    if a.degree < db:
        return Polynomial(), a
    quot = [Fraction(0)] * (a.degree - db + 1)
    for k in range(a.degree - db, -1, -1):
        c = rem[k + db] / lead
        quot[k] = c
        if c:
            for j, bc in enumerate(b.coeffs):
                rem[k + j] -= c * bc
    return Polynomial(tuple(quot)), Polynomial(tuple(rem[:db]))


def gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic greatest common divisor; gcd(0, 0) is 0."""
    while not b.is_zero:
        a, b = b, divide_with_remainder(a, b)[1]
        # keep coefficients small
        if not b.is_zero:
            b = b.primitive()
    return a.monic()


def square_free_part(p: Polynomial) -> Polynomial:
    if p.degree < 1:
        return p.monic()
    g = gcd(p, p.derivative())
    return divide_with_remainder(p, g)[0].monic()


def square_free_factorization(p: Polynomial) -> list[tuple[Polynomial, int]]:
    """Yun's algorithm: monic square-free factors with multiplicities (constant dropped)."""
    if p.degree < 1:
        return []
    factors = []
    dp = p.derivative()
    a0 = gcd(p, dp)
    b = divide_with_remainder(p, a0)[0]
    c = divide_with_remainder(dp, a0)[0]
    d = c - b.derivative()
    i = 1
    while b.degree >= 1:
        a = gcd(b, d)
        if a.degree >= 1:
            factors.append((a.monic(), i))
        b = divide_with_remainder(b, a)[0]
        c = divide_with_remainder(d, a)[0]
        d = c - b.derivative()
        i += 1
    return factors


def odd_part(p: Polynomial) -> Polynomial:
    """Product of the square-free factors of odd multiplicity (the sign-changing part)."""
    out = Polynomial.constant(1)
    for f, mult in square_free_factorization(p):
        if mult % 2 == 1:
            out = out * f
    return out


def deflate_double_root(p: Polynomial, x0) -> Polynomial:
    """q with p = (x - x0)^2 * q, by two rounds of synthetic division."""
    x0 = rational(x0)
    current = p
    for stage in (1, 2):
        cs = current.coeffs
        if not cs:
            return Polynomial()
        acc = Fraction(0)
        out = []
        for c in reversed(cs):
            acc = acc * x0 + c
            out.append(acc)
        rem = out.pop()
        if rem != 0:
            raise NotDoubleRoot(x0, stage, rem)
        current = Polynomial(tuple(reversed(out)))
    return current


# -- Sturm chains ------------------------------------------------------------


def _sign(v) -> int:
    if isinstance(v, Surd):
        return real_sign(v)
    return (v > 0) - (v < 0)


@dataclass(frozen=True)
class SturmChain:
    sequence: tuple[Polynomial, ...]

    @classmethod
    def of(cls, p: Polynomial) -> "SturmChain":
        if p.is_zero:
            raise ValueError("Sturm chain of the zero polynomial")
        seq = [p, p.derivative()]
        while not seq[-1].is_zero:
            r = divide_with_remainder(seq[-2], seq[-1])[1]
            # positive rescaling keeps signs and tames coefficient growth
            seq.append(-r if r.is_zero else (-r).scale(1 / r.content()))
        seq.pop()
        return cls(tuple(seq))

    def variations_at(self, x) -> int:
        signs = [s for s in (_sign(p(x)) for p in self.sequence) if s]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    def variations_at_infinity(self, sign: int) -> int:
        signs = []
        for p in self.sequence:
            s = _sign(p.leading)
            if sign < 0 and p.degree % 2 == 1:
                s = -s
            signs.append(s)
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    def variations(self, x) -> int:
        if x is None or x in ("+inf", "-inf"):
            raise ValueError("use variations_at_infinity")
        return self.variations_at(x)


def _variations(chain: SturmChain, end, is_lower: bool) -> int:
    if end is None:
        return chain.variations_at_infinity(-1 if is_lower else 1)
    return chain.variations_at(end)


def count_roots(p: Polynomial, d: DomainInterval) -> int:
    """Number of distinct real roots of p in d (exact, surd endpoints included)."""
    if p.is_zero:
        raise ValueError("count_roots of the zero polynomial")
    sf = square_free_part(p)
    if sf.degree < 1:
        return 0
    chain = SturmChain.of(sf)
    # Sturm counts roots in (lower, upper]
    n = _variations(chain, d.lower, True) - _variations(chain, d.upper, False)
    if d.lower is not None and not d.lower_open and _sign(sf(d.lower)) == 0:
        n += 1
    if d.upper is not None and d.upper_open and _sign(sf(d.upper)) == 0:
        n -= 1
    return n


def closure(d: DomainInterval) -> DomainInterval:
    return DomainInterval(d.lower, d.upper, d.lower is None, d.upper is None)


def interior(d: DomainInterval) -> DomainInterval:
    return DomainInterval(d.lower, d.upper, True, True)


class SignKind(Enum):
    NON_NEGATIVE = "NonNegative"
    NON_POSITIVE = "NonPositive"
    STRICTLY_POSITIVE = "StrictlyPositive"
    STRICTLY_NEGATIVE = "StrictlyNegative"
    IDENTICALLY_ZERO = "IdenticallyZero"
    MIXED = "Mixed"

    @property
    def nonnegative(self) -> bool:
        return self in (SignKind.NON_NEGATIVE, SignKind.STRICTLY_POSITIVE, SignKind.IDENTICALLY_ZERO)

    @property
    def nonpositive(self) -> bool:
        return self in (SignKind.NON_POSITIVE, SignKind.STRICTLY_NEGATIVE, SignKind.IDENTICALLY_ZERO)


@dataclass(frozen=True)
class SignVerdict:
    """Sign of a polynomial on an interval.

    ``witnesses`` holds ``(point, sign)`` pairs; Mixed verdicts carry two with
    opposite strict signs. ``root_count`` counts distinct roots on the closure.
    """

    kind: SignKind
    witnesses: tuple[tuple[Fraction, int], ...] = field(default=())
    root_count: int = 0

    @property
    def nonnegative(self) -> bool:
        return self.kind.nonnegative

    @property
    def nonpositive(self) -> bool:
        return self.kind.nonpositive


def _sample_point(d: DomainInterval) -> Fraction:
    """A rational point strictly inside d."""
    if d.lower is None and d.upper is None:
        return Fraction(0)
    if d.lower is None:
        return real_lower(d.upper, Fraction(1, 2)) - 1
    if d.upper is None:
        return real_upper(d.lower, Fraction(1, 2)) + 1
    eps = Fraction(1, 1 << 20)
    while True:
        lo, hi = real_upper(d.lower, eps), real_lower(d.upper, eps)
        if lo < hi:
            mid = (lo + hi) / 2
            if d.contains(mid):
                return mid
        eps /= 1 << 20


def _isolating_points(p: Polynomial, d: DomainInterval) -> list[Fraction]:
    """Rational points inside d, off the roots of p, with one in every gap between roots."""
    sf = square_free_part(p)
    inner = interior(d)
    if sf.degree < 1:
        return [_sample_point(inner)]
    chain = SturmChain.of(sf)
    bound = 1 + max(abs(c / sf.leading) for c in sf.coeffs[:-1])
    lo = -bound if d.lower is None else real_lower(d.lower, Fraction(1, 1 << 30))
    hi = bound if d.upper is None else real_upper(d.upper, Fraction(1, 1 << 30))
    tiny = (hi - lo) / (1 << 80)
    cells = [(lo, hi)]
    points: list[Fraction] = []
    while cells:
        a, b = cells.pop()
        n = chain.variations_at(a) - chain.variations_at(b)
        on_root = sf(a) == 0 or sf(b) == 0
        if (n >= 2 or (n == 1 and on_root)) and b - a > tiny:
            m = (a + b) / 2
            cells.append((m, b))
            cells.append((a, m))
            continue
        points.extend((a, (a + b) / 2, b))
    return sorted(c for c in set(points) if inner.contains(c) and sf(c) != 0)


def _off_root_point(p: Polynomial, d: DomainInterval) -> Fraction:
    """An interior rational point where p does not vanish."""
    for x in d.interior_grid(max(p.degree, 1) + 2):
        if p(x) != 0:
            return x
    return _isolating_points(p, d)[0]


def sign_on_interval(p: Polynomial, d: DomainInterval) -> SignVerdict:
    """Rigorous sign classification of p on the closure of d."""
    if p.is_zero:
        return SignVerdict(SignKind.IDENTICALLY_ZERO)
    cl = closure(d)
    roots = count_roots(p, cl)
    if p.degree == 0:
        s = _sign(p.leading)
        x = _sample_point(interior(d))
        return SignVerdict(SignKind.STRICTLY_POSITIVE if s > 0 else SignKind.STRICTLY_NEGATIVE, ((x, s),), 0)
    changing = odd_part(p)
    sign_changes = count_roots(changing, interior(d)) if changing.degree >= 1 else 0
    if sign_changes == 0:
        x = _off_root_point(p, d)
        s = _sign(p(x))
        if roots == 0:
            kind = SignKind.STRICTLY_POSITIVE if s > 0 else SignKind.STRICTLY_NEGATIVE
        else:
            kind = SignKind.NON_NEGATIVE if s > 0 else SignKind.NON_POSITIVE
        return SignVerdict(kind, ((x, s),), roots)
    wit = mixed_witnesses(p, d)
    return SignVerdict(SignKind.MIXED, wit, roots)


def mixed_witnesses(p: Polynomial, d: DomainInterval) -> tuple[tuple[Fraction, int], tuple[Fraction, int]]:
    """Two rational points with opposite strict signs of p.

    Tries interior grids with 10, 100, 1000 cells first, taking the leftmost
    strictly signed point and the rightmost point of the opposite sign, and
    falls back to one point per root gap.
    """
    for n in (10, 100, 1000):
        pts = d.interior_grid(n)
        found = _pick_opposite([(x, _sign(p(x))) for x in pts])
        if found:
            return found
    found = _pick_opposite([(x, _sign(p(x))) for x in _isolating_points(p, d)])
    if found:
        return found
    raise ArithmeticError("no sign change found although Sturm reports one")


def _pick_opposite(samples: Sequence[tuple[Fraction, int]]):
    strict = [(x, s) for x, s in samples if s]
    if not strict:
        return None
    first = strict[0]
    for x, s in reversed(strict):
        if s == -first[1]:
            return (first, (x, s))
    return None


def polynomial_from_expr(e: Expr) -> Polynomial:
    """Convert an expression that is a polynomial in x (no division by x)."""
    from .calculus import to_rational_function

    rf = to_rational_function(e)
    if rf.denominator.degree != 0:
        raise ValueError(f"{format_expression(e)} is not a polynomial")
    return rf.numerator.scale(1 / rf.denominator.leading)


def parse_polynomial(text: str) -> Polynomial:
    return polynomial_from_expr(parse_expression(text))


__all__ = [
    "DivisionByZeroPolynomial",
    "NotDoubleRoot",
    "Polynomial",
    "SignKind",
    "SignVerdict",
    "SturmChain",
    "count_roots",
    "deflate_double_root",
    "divide_with_remainder",
    "gcd",
    "mixed_witnesses",
    "odd_part",
    "parse_polynomial",
    "poly_arithmetic",
    "polynomial_from_expr",
    "sign_on_interval",
    "square_free_factorization",
    "square_free_part",
]
