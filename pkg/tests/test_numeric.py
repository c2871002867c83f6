from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from septangent.numeric import (
    DivisionByZero,
    DivisorContainsZero,
    NegativeRadicand,
    NonPositiveArgument,
    RatInterval,
    exp_enclosure,
    interval_arithmetic,
    ln_enclosure,
    nth_root_enclosure,
    rat_arithmetic,
    rational,
    rational_power,
)

mpmath.mp.dps = 50


def mp(q: F):
    return mpmath.mpf(q.numerator) / q.denominator


def encloses(iv: RatInterval, value) -> bool:
    return mp(iv.lo) <= value <= mp(iv.hi)


class TestRational:
    def test_decimal_literals_are_exact(self):
        assert rational("0.9") == F(9, 10)
        assert rational("5.69") == F(569, 100)

    def test_canonical_form(self):
        q = rational(F(6, -4))
        assert (q.numerator, q.denominator) == (-3, 2)
        assert rational(q) == q
        assert rational(0) == F(0, 1)

    def test_rejects_floats(self):
        with pytest.raises(TypeError):
            rational(0.5)

    def test_arithmetic_examples(self):
        assert rat_arithmetic(F(4, 3), F(3, 4), "*") == 1
        assert F(1, 9) + F(2, 27) * (0 - 1) == F(1, 27)
        assert rat_arithmetic(F(1, 9), rat_arithmetic(F(2, 27), -1, "*"), "+") == F(1, 27)
        assert 10 * F(1, 3) ** 3 - 9 * F(1, 3) ** 5 == F(1, 3)

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZero):
            rat_arithmetic(1, 0, "/")


class TestIntervals:
    def test_examples(self):
        assert interval_arithmetic(RatInterval(1, 2), RatInterval(3, 4), "+") == RatInterval(4, 6)
        assert interval_arithmetic(RatInterval(-1, 1), RatInterval(-1, 1), "*") == RatInterval(-1, 1)
        with pytest.raises(DivisorContainsZero):
            interval_arithmetic(RatInterval(1, 2), RatInterval(-1, 1), "/")

    def test_lo_le_hi_enforced(self):
        with pytest.raises(ValueError):
            RatInterval(2, 1)

    def test_even_power_of_straddling_interval(self):
        assert RatInterval(-2, 1) ** 2 == RatInterval(0, 4)


class TestRoots:
    def test_perfect_powers_are_points(self):
        assert nth_root_enclosure(8, 3, F(1, 10)) == RatInterval(2, 2)
        assert nth_root_enclosure(1, 5, F(1, 10)) == RatInterval(1, 1)
        assert nth_root_enclosure(F(4, 9), 2, F(1, 10)) == RatInterval.point(F(2, 3))

    def test_sqrt2(self):
        iv = nth_root_enclosure(2, 2, F(1, 1000))
        assert iv.width <= F(1, 1000)
        # bisection oracle on t^2 - 2
        assert iv.lo ** 2 <= 2 <= iv.hi ** 2

    def test_odd_root_of_negative(self):
        assert nth_root_enclosure(-8, 3, F(1, 100)) == RatInterval(-2, -2)

    def test_even_root_of_negative(self):
        with pytest.raises(NegativeRadicand):
            nth_root_enclosure(-4, 2, F(1, 100))

    def test_width_shrinks_with_eps(self):
        widths = [nth_root_enclosure(3, 3, F(1, 2**k)).width for k in range(2, 30, 3)]
        assert all(b <= a for a, b in zip(widths, widths[1:]))

    def test_rational_power(self):
        assert rational_power(4, F(3, 2), F(1, 10)) == RatInterval(8, 8)
        iv = rational_power(12 - 1, F(1, 3), F(1, 10**9))
        assert encloses(iv, mpmath.cbrt(11))


class TestLnExp:
    def test_trivial_points(self):
        assert ln_enclosure(RatInterval(1, 1), F(1, 10)) == RatInterval(0, 0)
        assert exp_enclosure(RatInterval(0, 0), F(1, 10)) == RatInterval(1, 1)

    def test_ln2(self):
        iv = ln_enclosure(RatInterval.point(2), F(1, 10**6))
        assert iv.width <= F(1, 10**6)
        assert encloses(iv, mpmath.log(2))

    @pytest.mark.parametrize("x", [F(1, 2**24), F(1, 3), F(2), F(8), F(1000001, 7), F(1, 10**9)])
    def test_ln_contains_true_value_with_width(self, x):
        iv = ln_enclosure(RatInterval.point(x), F(1, 10**12))
        assert 0 < iv.width <= F(1, 10**12)
        assert encloses(iv, mpmath.log(mp(x)))

    @pytest.mark.parametrize("x", [F(1), F(-7), F(1, 3), F(25, 2), F(-1, 1000)])
    def test_exp_contains_true_value(self, x):
        iv = exp_enclosure(RatInterval.point(x), F(1, 10**12))
        assert iv.width <= F(1, 10**12) * max(1, iv.hi)
        assert encloses(iv, mpmath.exp(mp(x)))

    def test_ln_interval_is_monotone_hull(self):
        iv = ln_enclosure(RatInterval(F(1, 2), 3), F(1, 10**8))
        assert encloses(iv, mpmath.log(0.5)) and encloses(iv, mpmath.log(3))

    def test_ln_non_positive(self):
        with pytest.raises(NonPositiveArgument):
            ln_enclosure(RatInterval(0, 1), F(1, 10))


small = st.fractions(min_value=-50, max_value=50, max_denominator=1000)
positive = st.fractions(min_value=F(1, 1000), max_value=100, max_denominator=1000)


def widen(a: F, w: F) -> RatInterval:
    return RatInterval(a - w, a + w)


@settings(max_examples=1000, deadline=None)
@given(small, small, st.fractions(min_value=0, max_value=1, max_denominator=50),
       st.sampled_from(["+", "-", "*", "/"]))
def test_containment_soundness(a, b, w, op):
    """The exact rational result lies inside the interval result."""
    ia, ib = widen(a, w), widen(b, w)
    if op == "/" and ib.contains_zero():
        with pytest.raises(DivisorContainsZero):
            interval_arithmetic(ia, ib, op)
        return
    exact = rat_arithmetic(a, b, op)
    assert interval_arithmetic(ia, ib, op).contains(exact)
    assert interval_arithmetic(RatInterval.point(a), RatInterval.point(b), op) == RatInterval.point(exact)


@settings(max_examples=200, deadline=None)
@given(positive, st.integers(min_value=2, max_value=7))
def test_root_enclosure_property(x, n):
    iv = nth_root_enclosure(x, n, F(1, 10**8))
    assert iv.width <= F(1, 10**8)
    assert iv.lo ** n <= x <= iv.hi ** n


@settings(max_examples=100, deadline=None)
@given(positive)
def test_ln_exp_enclosures_against_mpmath(x):
    assert encloses(ln_enclosure(RatInterval.point(x), F(1, 10**10)), mpmath.log(mp(x)))
    y = x / 10
    assert encloses(exp_enclosure(RatInterval.point(y), F(1, 10**10)), mpmath.exp(mp(y)))


@settings(max_examples=60, deadline=None)
@given(positive)
def test_width_shrinks_as_eps_halves(x):
    prev = None
    for k in range(4, 40, 6):
        w = ln_enclosure(RatInterval.point(x), F(1, 2**k)).width
        assert w <= F(1, 2**k)
        if prev is not None:
            assert w <= prev
        prev = w
