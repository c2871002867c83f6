"""Exact rationals and outward-rounded rational interval enclosures.

Rationals are plain :class:`fractions.Fraction` values; ``BigRational`` is an
alias kept for readability at call sites. Intervals never use binary floating
point: every bound is a rational and every operation returns an interval that
contains the exact image of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

BigRational = Fraction

RationalLike = Union[int, str, Fraction]

# Denominators above this many bits get rounded outward to a dyadic grid.
_MAX_DENOMINATOR_BITS = 512


class NumericError(ArithmeticError):
    """Base class for errors raised by the numeric kernel."""


class DivisionByZero(NumericError, ZeroDivisionError):
    pass


class DivisorContainsZero(NumericError, ZeroDivisionError):
    pass


class NegativeRadicand(NumericError, ValueError):
    pass


class NonPositiveArgument(NumericError, ValueError):
    pass


def rational(value: RationalLike) -> Fraction:
    """Convert ``value`` to an exact :class:`Fraction`.

    Strings may be integers, ``p/q`` or finite decimals (``"5.69"`` becomes
    ``569/100``). Floats are rejected so that no binary rounding sneaks in.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(c in text for c in "eEjJ_"):
            raise ValueError(f"not a rational literal: {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rat_arithmetic(a: RationalLike, b: RationalLike, op: str) -> Fraction:
    a, b = rational(a), rational(b)
    if op == "+":
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×"):
        return a * b
    if op in ("/", "÷"):
        if b == 0:
            raise DivisionByZero("division by zero")
        return a / b
    raise ValueError(f"unknown operator {op!r}")


def bits_for(eps: RationalLike) -> int:
    """Smallest k >= 0 with 2**-k <= eps."""
    eps = rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    k = 0
    while Fraction(1, 1 << k) > eps:
        k += 1
    return k


def _floor_dyadic(x: Fraction, bits: int) -> Fraction:
    return Fraction((x.numerator << bits) // x.denominator, 1 << bits)


def _ceil_dyadic(x: Fraction, bits: int) -> Fraction:
    return Fraction(-((-x.numerator << bits) // x.denominator), 1 << bits)


@dataclass(frozen=True)
class RatInterval:
    """Closed interval ``[lo, hi]`` with rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = rational(self.lo), rational(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: RationalLike) -> "RatInterval":
        x = rational(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        if isinstance(x, RatInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        x = rational(x)
        return self.lo <= x <= self.hi

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def sign(self) -> int | None:
        """+1 or -1 when the whole interval has that strict sign, 0 for [0, 0]."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        return None

    def hull(self, other: "RatInterval") -> "RatInterval":
        return RatInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def outward(self, bits: int) -> "RatInterval":
        """Round both ends outward to multiples of 2**-bits."""
        return RatInterval(_floor_dyadic(self.lo, bits), _ceil_dyadic(self.hi, bits))

    def tame(self, bits: int) -> "RatInterval":
        """Outward rounding applied only when denominators have grown large."""
        limit = max(_MAX_DENOMINATOR_BITS, 4 * bits)
        if self.lo.denominator.bit_length() <= limit and self.hi.denominator.bit_length() <= limit:
            return self
        return self.outward(max(bits, 64))

    @staticmethod
    def _coerce(other) -> "RatInterval":
        if isinstance(other, RatInterval):
            return other
        return RatInterval.point(other)

    def __add__(self, other) -> "RatInterval":
        o = self._coerce(other)
        return RatInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __sub__(self, other) -> "RatInterval":
        o = self._coerce(other)
        return RatInterval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other) -> "RatInterval":
        return self._coerce(other) - self

    def __neg__(self) -> "RatInterval":
        return RatInterval(-self.hi, -self.lo)

    def __mul__(self, other) -> "RatInterval":
        o = self._coerce(other)
        if self.is_point and o.is_point:
            return RatInterval.point(self.lo * o.lo)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RatInterval(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> "RatInterval":
        if self.contains_zero():
            raise DivisorContainsZero(f"divisor {self} contains zero")
        return RatInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other) -> "RatInterval":
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other) -> "RatInterval":
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, n: int) -> "RatInterval":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (self ** (-n)).reciprocal()
        if n == 0:
            return RatInterval.point(1)
        a, b = self.lo ** n, self.hi ** n
        if n % 2 == 1 or self.lo >= 0:
            return RatInterval(a, b) if a <= b else RatInterval(b, a)
        if self.hi <= 0:
            return RatInterval(b, a)
        return RatInterval(0, max(a, b))

    def __str__(self) -> str:
        return f"[{format_rational(self.lo)}, {format_rational(self.hi)}]"


def interval_arithmetic(a: RatInterval, b: RatInterval, op: str) -> RatInterval:
    if op == "+":
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×"):
        return a * b
    if op in ("/", "÷"):
        return a / b
    raise ValueError(f"unknown operator {op!r}")


def refine(compute: Callable[[int], RatInterval], eps: RationalLike) -> RatInterval:
    """Call ``compute(bits)`` with growing precision until the width is <= eps."""
    eps = rational(eps)
    bits = bits_for(eps) + 4
    for _ in range(12):
        iv = compute(bits)
        if iv.width <= eps:
            return iv
        bits *= 2
    raise NumericError(f"could not reach width {eps}")


# -- roots -------------------------------------------------------------------


def integer_root(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0, by bisection on the integers."""
    if n < 0:
        raise NegativeRadicand("negative radicand")
    if n < 2:
        return n
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if mid ** k <= n:
            lo = mid
        else:
            hi = mid
    return lo


def exact_root(x: Fraction, n: int) -> Fraction | None:
    """The rational n-th root of ``x`` if there is one (real, odd roots keep sign)."""
    if x < 0:
        if n % 2 == 0:
            return None
        r = exact_root(-x, n)
        return None if r is None else -r
    p, q = x.numerator, x.denominator
    a, b = integer_root(p, n), integer_root(q, n)
    if a ** n == p and b ** n == q:
        return Fraction(a, b)
    return None


def _root_bracket(x: Fraction, n: int, bits: int) -> RatInterval:
    # x >= 0; dyadic bracket of width 2**-bits
    big = (x.numerator << (bits * n)) // x.denominator
    a = integer_root(big, n)
    if a ** n * x.denominator == x.numerator << (bits * n):
        return RatInterval.point(Fraction(a, 1 << bits))
    return RatInterval(Fraction(a, 1 << bits), Fraction(a + 1, 1 << bits))


def nth_root_enclosure(x: RationalLike, n: int, eps: RationalLike) -> RatInterval:
    """Enclosure of the real n-th root of ``x`` of width at most ``eps``.

    Perfect n-th powers give point intervals. Odd roots of negatives are
    computed from the positive case; even roots of negatives raise
    :class:`NegativeRadicand`.
    """
    x = rational(x)
    if n < 1:
        raise ValueError("root index must be a positive integer")
    if x < 0:
        if n % 2 == 0:
            raise NegativeRadicand(f"even root of negative number {x}")
        return -nth_root_enclosure(-x, n, eps)
    exact = exact_root(x, n)
    if exact is not None:
        return RatInterval.point(exact)
    return _root_bracket(x, n, bits_for(eps))


def root_interval(x: RatInterval, n: int, eps: RationalLike) -> RatInterval:
    """Enclosure of {t**(1/n) : t in x} (monotone, so endpoints suffice)."""
    if n % 2 == 0 and x.lo < 0:
        raise NegativeRadicand(f"even root of interval {x} reaching below zero")
    lo = nth_root_enclosure(x.lo, n, eps).lo
    hi = lo if x.is_point and exact_root(x.lo, n) is not None else nth_root_enclosure(x.hi, n, eps).hi
    return RatInterval(lo, hi)


def rational_power_interval(x: RatInterval, r: Fraction, eps: RationalLike) -> RatInterval:
    """Enclosure of {t**r : t in x} for a rational exponent ``r = p/q``."""
    p, q = r.numerator, r.denominator
    if q == 1:
        return x ** p
    if p < 0 and x.contains_zero():
        raise DivisorContainsZero(f"negative power of interval {x} containing zero")
    base = root_interval(x, q, eps)
    return base ** p


def rational_power(x: RationalLike, r: RationalLike, eps: RationalLike) -> RatInterval:
    """Enclosure (width <= eps) of ``x**r``; a point when the value is rational."""
    x, r = rational(x), rational(r)
    p, q = r.numerator, r.denominator
    if x == 0:
        if p < 0:
            raise DivisionByZero("zero to a negative power")
        return RatInterval.point(0 if p > 0 else 1)
    root = exact_root(x, q)
    if root is not None:
        return RatInterval.point(root ** p)
    if x < 0 and q % 2 == 0:
        raise NegativeRadicand(f"even root of negative number {x}")
    return refine(lambda bits: rational_power_interval(RatInterval.point(x), r, Fraction(1, 1 << bits)), eps)


# -- ln / exp ----------------------------------------------------------------


def _atanh_sum(z: Fraction, bits: int) -> RatInterval:
    # atanh(z) for 0 <= z <= 1/3; all terms positive, remainder bounded by a
    # geometric tail: sum_{j>N} z^(2j+1)/(2j+1) <= z^(2N+3) / ((2N+3)(1 - z^2))
    tol = Fraction(1, 1 << bits)
    z2 = z * z
    term = z
    total = Fraction(0)
    j = 0
    while True:
        total += term / (2 * j + 1)
        term *= z2
        tail = term / ((2 * j + 3) * (1 - z2))
        if tail <= tol:
            return RatInterval(total, total + tail).outward(bits + 2)
        j += 1


@lru_cache(maxsize=64)
def _ln2(bits: int) -> RatInterval:
    return 2 * _atanh_sum(Fraction(1, 3), bits + 1)


def _ln_point(x: Fraction, bits: int) -> RatInterval:
    if x <= 0:
        raise NonPositiveArgument(f"ln of non-positive number {x}")
    if x == 1:
        return RatInterval.point(0)
    if x < 1:
        return -_ln_point(1 / x, bits)
    j = x.numerator.bit_length() - x.denominator.bit_length()
    while Fraction(2) ** j > x:
        j -= 1
    while Fraction(2) ** (j + 1) <= x:
        j += 1
    y = x / Fraction(2) ** j  # 1 <= y < 2
    guard = bits + j.bit_length() + 4
    z = (y - 1) / (y + 1)
    reduced = 2 * _atanh_sum(z, guard) if z else RatInterval.point(0)
    return (j * _ln2(guard) + reduced).outward(bits + 2)


def _round_down_rel(x: Fraction, bits: int) -> Fraction:
    # keep about `bits` significant bits, rounding toward zero; x > 0
    shift = bits - (x.numerator.bit_length() - x.denominator.bit_length())
    if shift <= 0:
        return Fraction(x.numerator // x.denominator)
    return _floor_dyadic(x, shift)


def _round_up_rel(x: Fraction, bits: int) -> Fraction:
    shift = bits - (x.numerator.bit_length() - x.denominator.bit_length())
    if shift <= 0:
        return Fraction(-(-x.numerator // x.denominator))
    return _ceil_dyadic(x, shift)


def ln_enclosure(x: RatInterval, eps: RationalLike) -> RatInterval:
    """Enclosure of ln over ``x`` (lo must be positive); width <= eps for points."""
    x = RatInterval._coerce(x)
    if x.lo <= 0:
        raise NonPositiveArgument(f"ln of interval {x} reaching zero or below")

    def compute(bits: int) -> RatInterval:
        lo_arg = x.lo if x.lo.denominator.bit_length() < 4 * bits else _round_down_rel(x.lo, 2 * bits)
        hi_arg = x.hi if x.hi.denominator.bit_length() < 4 * bits else _round_up_rel(x.hi, 2 * bits)
        if lo_arg <= 0:
            lo_arg = x.lo
        lo_enc = _ln_point(lo_arg, bits)
        hi_enc = lo_enc if lo_arg == hi_arg else _ln_point(hi_arg, bits)
        return RatInterval(lo_enc.lo, hi_enc.hi)

    if not x.is_point:
        return compute(bits_for(eps) + 4)
    return refine(compute, eps)


def _exp_point(x: Fraction, bits: int) -> RatInterval:
    if x == 0:
        return RatInterval.point(1)
    s = 0
    r = x
    while abs(r) > Fraction(1, 2):
        r /= 2
        s += 1
    guard = bits + 2 * s + max(0, int(abs(x)) * 2) + 8
    tol = Fraction(1, 1 << guard)
    total = Fraction(0)
    term = Fraction(1)
    k = 0
    while True:
        total += term
        k += 1
        term = term * r / k
        # Lagrange remainder: |R| <= |r|^k / k! * e^|r| < 2 |term| for |r| <= 1/2
        bound = 2 * abs(term)
        if bound <= tol:
            break
    iv = RatInterval(total - bound, total + bound).outward(guard)
    for _ in range(s):
        iv = (iv * iv).outward(guard)
    return iv


def exp_enclosure(x: RatInterval, eps: RationalLike) -> RatInterval:
    """Enclosure of exp over ``x``; width <= eps for point inputs."""
    x = RatInterval._coerce(x)

    def compute(bits: int) -> RatInterval:
        lo = _exp_point(x.lo, bits).lo
        hi = lo if x.lo == x.hi == 0 else _exp_point(x.hi, bits).hi
        return RatInterval(lo, max(lo, hi))

    if not x.is_point:
        return compute(bits_for(eps) + 4)
    return refine(compute, eps)
