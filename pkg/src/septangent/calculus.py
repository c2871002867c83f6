"""Symbolic differentiation, rational-function normal form and certified sign checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import inf, isinf

import numpy as np

from .expr import (
    Add,
    Const,
    Div,
    DomainInterval,
    DomainViolation,
    Expr,
    Ln,
    Mul,
    Neg,
    PowInt,
    PowRat,
    Sub,
    Var,
    evaluate_enclosure,
    evaluate_point,
    format_expression,
    to_float_function,
    try_exact,
)
from .numeric import (
    DivisionByZero,
    DivisorContainsZero,
    NumericError,
    RatInterval,
    bits_for,
    ln_enclosure,
    rational,
    rational_power_interval,
)
from .poly import (
    DivisionByZeroPolynomial,
    Polynomial,
    SignKind,
    SignVerdict,
    count_roots,
    divide_with_remainder,
    gcd,
    interior,
    sign_on_interval,
)


class NotRationalFunction(ValueError):
    """The expression has a root or logarithm; use the interval backend."""


# -- smart constructors: fold only the trivial cases --------------------------


def _is_const(e: Expr, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if isinstance(b, Neg):
        return sub(a, b.arg)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    return Sub(a, b)


def neg(a: Expr) -> Expr:
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0) or _is_const(b, 0):
        return Const(0)
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a, -1):
        return neg(b)
    if _is_const(b, -1):
        return neg(a)
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(b):
        a, b = b, a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0):
        return Const(0)
    if _is_const(b, 1):
        return a
    if _is_const(a) and _is_const(b) and b.value != 0:
        return Const(a.value / b.value)
    return Div(a, b)


def power(base: Expr, r) -> Expr:
    r = rational(r)
    if r == 0:
        return Const(1)
    if r == 1:
        return base
    if _is_const(base) and r.denominator == 1 and (base.value != 0 or r > 0):
        return Const(base.value ** int(r))
    return base ** r


def differentiate(e: Expr) -> Expr:
    """Exact derivative with respect to x (sum, product, quotient, power, ln, chain rules)."""
    if isinstance(e, Const):
        return Const(0)
    if isinstance(e, Var):
        return Const(1)
    if isinstance(e, Add):
        return add(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Sub):
        return sub(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Neg):
        return neg(differentiate(e.arg))
    if isinstance(e, Mul):
        da, db = differentiate(e.left), differentiate(e.right)
        return add(mul(da, e.right), mul(e.left, db))
    if isinstance(e, Div):
        da, db = differentiate(e.left), differentiate(e.right)
        if _is_const(db, 0):
            return div(da, e.right)
        return div(sub(mul(da, e.right), mul(e.left, db)), power(e.right, 2))
    if isinstance(e, PowInt):
        n = e.exponent
        if n == 0:
            return Const(0)
        return mul(mul(Const(n), power(e.base, n - 1)), differentiate(e.base))
    if isinstance(e, PowRat):
        r = e.exponent
        return mul(mul(Const(r), power(e.base, r - 1)), differentiate(e.base))
    if isinstance(e, Ln):
        return div(differentiate(e.arg), e.arg)
    raise TypeError(f"not an expression: {e!r}")


def nth_derivative(e: Expr, n: int) -> Expr:
    for _ in range(n):
        e = differentiate(e)
    return e


# -- rational functions ------------------------------------------------------


@dataclass(frozen=True)
class RationalFunction:
    """P/Q in lowest terms with a monic denominator."""

    numerator: Polynomial
    denominator: Polynomial

    def __post_init__(self):
        p, q = self.numerator, self.denominator
        if q.is_zero:
            raise DivisionByZeroPolynomial("zero denominator")
        if p.is_zero:
            p, q = Polynomial(), Polynomial.constant(1)
        else:
            g = gcd(p, q)
            if g.degree > 0:
                p = divide_with_remainder(p, g)[0]
                q = divide_with_remainder(q, g)[0]
            lead = q.leading
            p, q = p.scale(1 / lead), q.scale(1 / lead)
        object.__setattr__(self, "numerator", p)
        object.__setattr__(self, "denominator", q)

    @classmethod
    def of(cls, p: Polynomial) -> "RationalFunction":
        return cls(p, Polynomial.constant(1))

    def __add__(self, o: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            self.numerator * o.denominator + o.numerator * self.denominator, self.denominator * o.denominator
        )

    def __sub__(self, o: "RationalFunction") -> "RationalFunction":
        return self + (-o)

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.numerator, self.denominator)

    def __mul__(self, o: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.numerator * o.numerator, self.denominator * o.denominator)

    def __truediv__(self, o: "RationalFunction") -> "RationalFunction":
        if o.numerator.is_zero:
            raise DivisionByZeroPolynomial("division by the zero function")
        return RationalFunction(self.numerator * o.denominator, self.denominator * o.numerator)

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            if self.numerator.is_zero:
                raise DivisionByZeroPolynomial("zero to a negative power")
            return RationalFunction(self.denominator ** (-n), self.numerator ** (-n))
        return RationalFunction(self.numerator ** n, self.denominator ** n)

    def __call__(self, x) -> Fraction:
        q = self.denominator(x)
        if q == 0:
            raise DivisionByZero("denominator vanishes")
        return self.numerator(x) / q

    @property
    def is_polynomial(self) -> bool:
        return self.denominator.degree == 0


def to_rational_function(e: Expr) -> RationalFunction:
    if isinstance(e, Const):
        return RationalFunction.of(Polynomial.constant(e.value))
    if isinstance(e, Var):
        return RationalFunction.of(Polynomial.x())
    if isinstance(e, Add):
        return to_rational_function(e.left) + to_rational_function(e.right)
    if isinstance(e, Sub):
        return to_rational_function(e.left) - to_rational_function(e.right)
    if isinstance(e, Neg):
        return -to_rational_function(e.arg)
    if isinstance(e, Mul):
        return to_rational_function(e.left) * to_rational_function(e.right)
    if isinstance(e, Div):
        return to_rational_function(e.left) / to_rational_function(e.right)
    if isinstance(e, PowInt):
        return to_rational_function(e.base) ** e.exponent
    if isinstance(e, (PowRat, Ln)):
        raise NotRationalFunction(f"{format_expression(e)} is not a rational function")
    raise TypeError(f"not an expression: {e!r}")


def try_rational_function(e: Expr) -> RationalFunction | None:
    try:
        return to_rational_function(e)
    except NotRationalFunction:
        return None


# -- certified signs ---------------------------------------------------------


class Sign(Enum):
    POSITIVE = "Positive"  # >= 0 throughout
    NEGATIVE = "Negative"  # <= 0 throughout
    ZERO = "Zero"  # identically zero
    MIXED = "Mixed"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SignResult:
    """Outcome of a sign certification.

    ``strict`` is True when the sign was shown to be strict on the closure.
    ``witnesses`` holds ``(point, value)`` pairs with exact or enclosed values;
    ``gaps`` lists boxes left unresolved by the bisection.
    """

    kind: Sign
    witnesses: tuple = ()
    strict: bool = False
    method: str = "polynomial"
    verdict: SignVerdict | None = None
    boxes: int = 0
    gaps: tuple[RatInterval, ...] = field(default=())

    @property
    def certified(self) -> bool:
        return self.kind in (Sign.POSITIVE, Sign.NEGATIVE, Sign.ZERO)


DEFAULT_BUDGET = 40
MAX_BOXES = 20000


def _value(e: Expr, x: Fraction):
    v = try_exact(e, x)
    return v if v is not None else evaluate_point(e, x)


def _strict_sign(v) -> int:
    if isinstance(v, RatInterval):
        return v.sign() or 0 if not v.contains_zero() else 0
    return (v > 0) - (v < 0)


def _grid_witnesses(e: Expr, d: DomainInterval, levels=(10, 100, 1000)):
    """Leftmost strictly signed grid point and rightmost point of the opposite sign.

    Floats only pick candidates; both returned values are exact or enclosed
    with a certified strict sign.
    """
    fn = to_float_function(e)
    for n in levels:
        pts = d.interior_grid(n)
        if not pts:
            continue
        vals = fn(np.array([float(x) for x in pts]))
        order = [i for i in range(len(pts)) if np.isfinite(vals[i]) and vals[i] != 0]
        certified = []
        for i in order:
            c = _certified_sign(e, pts[i])
            if c:
                certified = [c]
                break
        if not certified:
            continue
        first = certified[0]
        for i in reversed(order):
            if np.sign(vals[i]) == -first[2]:
                c = _certified_sign(e, pts[i])
                if c and c[2] == -first[2]:
                    return ((first[0], first[1]), (c[0], c[1]))
    return None


def _certified_sign(e: Expr, x: Fraction):
    try:
        v = _value(e, x)
    except (DomainViolation, NumericError, ArithmeticError):
        return None
    s = _strict_sign(v)
    return (x, v, s) if s else None


def expression_sign(e: Expr, d: DomainInterval, budget: int = DEFAULT_BUDGET, eps=Fraction(1, 1 << 60)) -> SignResult:
    """Certify the sign of ``e`` on ``d``.

    Rational functions go through Sturm sign verdicts of numerator and
    denominator; other expressions use adaptive interval bisection on the
    closure with at most ``budget`` halvings per box.
    """
    rf = try_rational_function(e)
    if rf is not None:
        return _rational_sign(rf, d)
    return _interval_sign(e, d, budget, eps)


def _rational_sign(rf: RationalFunction, d: DomainInterval) -> SignResult:
    p, q = rf.numerator, rf.denominator
    if q.degree > 0 and count_roots(q, d) > 0:
        return SignResult(Sign.INCONCLUSIVE, method="polynomial")
    tau = sign_on_interval(q, interior(d)).witnesses[0][1] if q.degree > 0 else 1
    v = sign_on_interval(p, d)
    if v.kind is SignKind.IDENTICALLY_ZERO:
        return SignResult(Sign.ZERO, strict=False, verdict=v)
    if v.kind is SignKind.MIXED:
        wit = tuple((x, rf(x)) for x, _ in v.witnesses)
        return SignResult(Sign.MIXED, wit, verdict=v)
    positive = v.nonnegative if tau > 0 else v.nonpositive
    strict = v.kind in (SignKind.STRICTLY_POSITIVE, SignKind.STRICTLY_NEGATIVE)
    # closed endpoints that are roots of the denominator were excluded above
    wit = tuple((x, rf(x)) for x, _ in v.witnesses)
    return SignResult(Sign.POSITIVE if positive else Sign.NEGATIVE, wit, strict=strict, verdict=v)


def bisect_sign(
    e: Expr,
    box: RatInterval,
    want: int,
    budget: int = DEFAULT_BUDGET,
    eps=Fraction(1, 1 << 60),
    max_boxes: int = MAX_BOXES,
):
    """Cover ``box`` by sub-boxes whose enclosure of e has sign ``want`` (>= 0 or <= 0).

    Returns ``(proved, boxes, gaps, refuting)`` where ``boxes`` lists
    ``(subbox, enclosure)`` pairs, ``gaps`` are boxes left open at the depth
    limit and ``refuting`` is a sub-box whose enclosure has the wrong strict sign.
    """
    done: list[tuple[RatInterval, RatInterval]] = []
    gaps: list[RatInterval] = []
    stack = [(box, 0)]
    count = 0
    while stack:
        b, depth = stack.pop()
        count += 1
        try:
            v = evaluate_enclosure(e, b, eps)
        except (DomainViolation, DivisorContainsZero, DivisionByZero):
            v = None
        if v is not None:
            if (want > 0 and v.lo >= 0) or (want < 0 and v.hi <= 0):
                done.append((b, v))
                continue
            if (want > 0 and v.hi < 0) or (want < 0 and v.lo > 0):
                return False, done, gaps, b
        if depth >= budget or count >= max_boxes:
            gaps.append(b)
            if count >= max_boxes:
                gaps.extend(s for s, _ in stack)
                break
            continue
        m = b.midpoint
        stack.append((RatInterval(m, b.hi), depth + 1))
        stack.append((RatInterval(b.lo, m), depth + 1))
    done.sort(key=lambda t: t[0].lo)
    return not gaps, done, gaps, None


# -- one-sided enclosures at domain ends -------------------------------------
#
# A box touching an end of the domain may hold a point where some subterm is
# singular (a pole or an infinite slope at an open end). Such subterms are
# clipped to the side of zero certified exactly on the part of the domain
# inside the box, and bounds are allowed to be infinite.


class _Unresolved(Exception):
    pass


def _emul(a, b):
    if a == 0 or b == 0:
        return Fraction(0)
    if isinf(a) or isinf(b):
        return inf if (a > 0) == (b > 0) else -inf
    return a * b


def _einv(lo, hi):
    """1/[lo, hi] for an interval on one side of zero (an end 0 is open)."""
    if lo >= 0:
        return (Fraction(0) if isinf(hi) else 1 / hi, inf if lo == 0 else 1 / lo)
    return (-inf if hi == 0 else 1 / hi, Fraction(0) if isinf(lo) else 1 / lo)


def _epow_int(lo, hi, k: int):
    def pw(t):
        if isinf(t):
            return inf if t > 0 or k % 2 == 0 else -inf
        return t**k

    if k % 2 == 1 or lo >= 0:
        return (pw(lo), pw(hi))
    if hi <= 0:
        return (pw(hi), pw(lo))
    return (Fraction(0), max(pw(lo), pw(hi)))


def _epow_pos(lo, hi, r: Fraction, tol):
    """[lo, hi]**r for 0 <= lo; an end 0 is open when r < 0."""

    def pt(t, upper: bool):
        if t == 0:
            return Fraction(0) if r > 0 else inf
        if isinf(t):
            return inf if r > 0 else Fraction(0)
        iv = rational_power_interval(RatInterval.point(t), r, tol)
        return iv.hi if upper else iv.lo

    if r > 0:
        return (pt(lo, False), pt(hi, True))
    return (pt(hi, False), pt(lo, True))


def _piece_sign(e: Expr, piece: DomainInterval) -> int:
    """Strict sign of e on piece when certified exactly, else 0."""
    rf = try_rational_function(e)
    if rf is None:
        return 0
    p, q = rf.numerator, rf.denominator
    if p.is_zero or count_roots(p, piece) or (q.degree > 0 and count_roots(q, piece)):
        return 0
    pts = piece.interior_grid(4)
    if not pts:
        return 0
    v = rf(pts[0])
    return (v > 0) - (v < 0)


def _clip(e: Expr, lo, hi, piece: DomainInterval):
    s = _piece_sign(e, piece)
    if s > 0:
        return (max(lo, Fraction(0)), hi)
    if s < 0:
        return (lo, min(hi, Fraction(0)))
    raise _Unresolved


def one_sided_enclosure(e: Expr, box: RatInterval, piece: DomainInterval, eps=Fraction(1, 1 << 60)):
    """Sound bounds ``(lo, hi)`` of e over ``piece``, a subset of ``box``.

    Bounds may be ``-inf``/``inf``. Returns None when some singular subterm
    cannot be certified to keep one sign on ``piece``.
    """
    tol = Fraction(1, 1 << (bits_for(eps) + 8))

    def ev(n: Expr):
        if isinstance(n, Const):
            return (n.value, n.value)
        if isinstance(n, Var):
            return (box.lo, box.hi)
        if isinstance(n, Neg):
            lo, hi = ev(n.arg)
            return (-hi, -lo)
        if isinstance(n, (Add, Sub)):
            a, b = ev(n.left), ev(n.right)
            if isinstance(n, Sub):
                b = (-b[1], -b[0])
            return (a[0] + b[0], a[1] + b[1])
        if isinstance(n, (Mul, Div)):
            a, b = ev(n.left), ev(n.right)
            if isinstance(n, Div):
                if b[0] <= 0 <= b[1]:
                    b = _clip(n.right, *b, piece)
                b = _einv(*b)
            ps = [_emul(x, y) for x in a for y in b]
            return (min(ps), max(ps))
        if isinstance(n, PowInt):
            lo, hi = ev(n.base)
            k = n.exponent
            if k > 0:
                return _epow_int(lo, hi, k)
            if lo <= 0 <= hi:
                lo, hi = _clip(n.base, lo, hi, piece)
            return _einv(*_epow_int(lo, hi, -k))
        if isinstance(n, PowRat):
            lo, hi = ev(n.base)
            r = n.exponent
            if lo < 0 < hi or (r < 0 and lo <= 0 <= hi) or (r.denominator % 2 == 0 and lo < 0):
                lo, hi = _clip(n.base, lo, hi, piece)
            if lo >= 0:
                return _epow_pos(lo, hi, r, tol)
            if r.denominator % 2 == 0:
                raise _Unresolved
            a, b = _epow_pos(-hi, -lo, r, tol)
            return (-b, -a) if r.numerator % 2 else (a, b)
        if isinstance(n, Ln):
            lo, hi = ev(n.arg)
            if lo <= 0:
                lo, hi = _clip(n.arg, lo, hi, piece)
            if hi <= 0:
                raise _Unresolved
            a = -inf if lo == 0 else ln_enclosure(RatInterval.point(lo), tol).lo
            b = inf if isinf(hi) else ln_enclosure(RatInterval.point(hi), tol).hi
            return (a, b)
        raise TypeError(f"not an expression: {n!r}")

    try:
        return ev(e)
    except (_Unresolved, NumericError, ArithmeticError, DomainViolation):
        return None


def _resolve_end_gaps(e: Expr, d: DomainInterval, hull: RatInterval, gaps, want: int, eps):
    """Settle gaps at the ends of the hull by one-sided enclosures.

    Returns the unsettled gaps and whether every settled one had a strict sign.
    """
    rest = []
    strict = True
    for g in gaps:
        ok = False
        if g.lo == hull.lo or g.hi == hull.hi:
            piece = d.intersect(DomainInterval.closed(g.lo, g.hi))
            v = None if piece is None else one_sided_enclosure(e, g, piece, eps)
            ok = piece is None or (v is not None and (v[0] >= 0 if want > 0 else v[1] <= 0))
            if ok and v is not None:
                strict = strict and (v[0] > 0 if want > 0 else v[1] < 0)
        if not ok:
            rest.append(g)
    return rest, strict


def _interval_sign(e: Expr, d: DomainInterval, budget: int, eps) -> SignResult:
    wit = _grid_witnesses(e, d)
    if wit:
        return SignResult(Sign.MIXED, wit, method="interval")
    if not d.bounded:
        return SignResult(Sign.INCONCLUSIVE, method="interval")
    hull = d.closure_hull()
    probe = None
    for x in d.interior_grid(10):
        c = _certified_sign(e, x)
        if c:
            probe = c[2]
            break
    want = probe or 1
    proved, boxes, gaps, bad = bisect_sign(e, hull, want, budget, eps)
    end_strict = True
    if gaps and bad is None:
        gaps, end_strict = _resolve_end_gaps(e, d, hull, gaps, want, eps)
        proved = not gaps
    if proved:
        strict = end_strict and all((v.lo > 0) if want > 0 else (v.hi < 0) for _, v in boxes)
        return SignResult(Sign.POSITIVE if want > 0 else Sign.NEGATIVE, (), strict, "interval", boxes=len(boxes))
    return SignResult(Sign.INCONCLUSIVE, method="interval", boxes=len(boxes), gaps=tuple(gaps))


def second_derivative_sign(e: Expr, d: DomainInterval, budget: int = DEFAULT_BUDGET) -> SignResult:
    """Certified sign of f'' on d: Positive, Negative, Mixed (with witnesses) or Inconclusive."""
    return expression_sign(nth_derivative(e, 2), d, budget)
