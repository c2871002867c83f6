from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from septangent.calculus import (
    NotRationalFunction,
    Sign,
    differentiate,
    expression_sign,
    one_sided_enclosure,
    second_derivative_sign,
    to_rational_function,
)
from septangent.expr import (
    Add,
    Const,
    Div,
    DomainInterval,
    DomainViolation,
    Mul,
    Neg,
    PowInt,
    PowRat,
    Sub,
    Var,
    evaluate_exact,
    evaluate_point,
    parse_domain,
    parse_expression,
    try_exact,
)
from septangent.numeric import RatInterval
from septangent.poly import Polynomial, gcd

P = parse_expression


def same_function(a, b, points):
    return all(evaluate_exact(a, x) == evaluate_exact(b, x) for x in points)


POINTS = [F(-3), F(-1, 2), F(0), F(1, 3), F(2), F(7, 5)]


class TestDifferentiate:
    def test_quartic(self):
        assert same_function(differentiate(P("x^4")), P("4*x^3"), POINTS)

    def test_baltic_slope(self):
        assert evaluate_exact(differentiate(P("x/(x^3+8)")), 1) == F(2, 27)

    def test_quintic_factorization(self):
        d = differentiate(P("10*x^3 - 9*x^5"))
        assert same_function(d, P("30*x^2 - 45*x^4"), POINTS)
        assert same_function(d, P("-45*x^2*(x^2 - 2/3)"), POINTS)

    def test_cube_root_slope(self):
        d = differentiate(P("-x*(12 - x^2)^(1/3)"))
        assert evaluate_exact(d, 2) == F(-4, 3)

    def test_ln_rule(self):
        assert evaluate_exact(differentiate(P("ln(x^2 + 1)")), 1) == 1


class TestRationalFunction:
    def test_examples(self):
        rf = to_rational_function(P("x/(x^3+8)"))
        assert rf.numerator == Polynomial.of(0, 1)
        assert rf.denominator == Polynomial.of(8, 0, 0, 1)

    def test_cancellation(self):
        rf = to_rational_function(P("(x^2 - 1) + 1 - x^2"))
        assert rf.numerator == Polynomial.of() and rf.denominator == Polynomial.of(1)

    def test_not_rational(self):
        with pytest.raises(NotRationalFunction):
            to_rational_function(P("-x*(12 - x^2)^(1/3)"))

    def test_invariants(self):
        rf = to_rational_function(P("(x^2 - 1)/(2*x - 2) + 1/(x+1)"))
        assert gcd(rf.numerator, rf.denominator).degree == 0
        assert rf.denominator.leading > 0


class TestSecondDerivative:
    def test_quintic_mixed(self):
        r = second_derivative_sign(P("10*x^3 - 9*x^5"), DomainInterval.closed(0, 1))
        assert r.kind is Sign.MIXED
        assert dict(r.witnesses) == {F(1, 10): F(291, 50), F(9, 10): F(-3861, 50)}

    def test_square_on_line(self):
        assert second_derivative_sign(P("x^2"), DomainInterval.real_line()).kind is Sign.POSITIVE

    def test_cube_root_convex(self):
        r = second_derivative_sign(P("-x*(12 - x^2)^(1/3)"), parse_domain("(0, 2*sqrt(3))"))
        assert r.kind is Sign.POSITIVE

    def test_interval_route_certified_closed(self):
        d = parse_domain("[1/100, 2*sqrt(3) - 1/100]")
        r = second_derivative_sign(P("-x*(12 - x^2)^(1/3)"), d, budget=40)
        assert r.kind is Sign.POSITIVE and r.method == "interval" and not r.gaps

    def test_expression_sign_negative(self):
        r = expression_sign(P("-(x^2 + 1)"), DomainInterval.real_line())
        assert r.kind is Sign.NEGATIVE and r.strict


# -- properties ----------------------------------------------------------------

consts = st.fractions(min_value=-5, max_value=5, max_denominator=6).map(Const)
leaves = st.one_of(st.just(Var()), consts)


def _extend(children):
    return st.one_of(
        st.builds(Add, children, children),
        st.builds(Sub, children, children),
        st.builds(Mul, children, children),
        st.builds(Div, children, children),
        st.builds(Neg, children),
        st.builds(PowInt, children, st.integers(min_value=-2, max_value=3).filter(lambda n: n not in (0, 1))),
    )


rational_asts = st.recursive(leaves, _extend, max_leaves=6)


@settings(max_examples=200, deadline=None)
@given(
    st.recursive(
        leaves,
        lambda c: st.one_of(_extend(c), st.builds(PowRat, c, st.sampled_from([F(1, 2), F(1, 3)]))),
        max_leaves=5,
    ),
    st.fractions(min_value=F(1, 2), max_value=3, max_denominator=10),
)
def test_derivative_matches_central_difference(e, x):
    """|f'(x) - (f(x+h) - f(x-h)) / 2h| = O(h^2), checked by enclosures."""
    h = F(1, 10**4)
    eps = F(1, 10**30)
    try:
        d = evaluate_point(differentiate(e), x, eps)
        hi = evaluate_point(e, x + h, eps)
        lo = evaluate_point(e, x - h, eps)
        d3 = evaluate_point(differentiate(differentiate(differentiate(e))), x, F(1, 10**6))
    except (DomainViolation, ArithmeticError, ValueError):
        return
    fd = (hi - lo) / (2 * h)
    # Taylor remainder bound with a margin for the third derivative varying on [x-h, x+h]
    c = 2 * max(abs(d3.lo), abs(d3.hi)) + 1
    gap = max(abs(fd.hi - d.lo), abs(d.hi - fd.lo))
    assert gap <= c * h * h


@settings(max_examples=100, deadline=None)
@given(rational_asts, st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=9), min_size=1, max_size=5))
def test_rational_function_preserves_values(e, xs):
    try:
        rf = to_rational_function(e)
    except ArithmeticError:
        return
    for x in xs:
        try:
            v = try_exact(e, x)
        except ArithmeticError:
            continue
        assert rf.denominator(x) != 0
        assert rf(x) == v


class TestOneSidedEnclosure:
    def test_pole_at_open_end(self):
        piece = DomainInterval(F(1, 2), F(1), False, True)
        lo, hi = one_sided_enclosure(P("1/(1 - x)"), RatInterval(F(1, 2), F(1)), piece)
        assert lo == 2 and hi == float("inf")

    def test_uncertified_singularity_is_refused(self):
        # the divisor vanishes inside the piece, so no clipping is allowed
        piece = DomainInterval.closed(0, 1)
        assert one_sided_enclosure(P("1/(x - 1/2)"), RatInterval(0, 1), piece) is None

    def test_pole_sign_not_overclaimed(self):
        r = expression_sign(P("x^(1/2) - 1/(1 - x)"), DomainInterval(0, 1, False, True))
        assert r.kind is Sign.NEGATIVE
        r = expression_sign(P("-(1 - x)^(-1/3)"), DomainInterval(0, 1, False, True))
        assert r.kind is Sign.NEGATIVE and r.strict
