from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from septangent.expr import (
    Add,
    Const,
    Div,
    DomainInterval,
    DomainViolation,
    ExpressionSyntaxError,
    IrrationalValue,
    Ln,
    Mul,
    Neg,
    PowInt,
    PowRat,
    Sub,
    Surd,
    UnknownIdentifier,
    Var,
    X,
    evaluate_enclosure,
    evaluate_exact,
    evaluate_point,
    format_expression,
    parse_domain,
    parse_expression,
    sqrt_of,
    try_exact,
)
from septangent.numeric import RatInterval


class TestParse:
    def test_rational_function(self):
        assert parse_expression("x / (x^3 + 8)") == Div(Var(), Add(PowInt(Var(), 3), Const(F(8))))

    def test_var(self):
        assert parse_expression("x") == Var()

    def test_cube_root(self):
        e = parse_expression("-x * (12 - x^2)^(1/3)")
        assert e == Neg(Mul(Var(), PowRat(Sub(Const(F(12)), PowInt(Var(), 2)), F(1, 3))))

    def test_decimal_is_exact(self):
        assert parse_expression("0.9") == Const(F(9, 10))

    def test_power_is_right_associative(self):
        assert evaluate_exact(parse_expression("2^3^2"), 0) == 512

    def test_precedence(self):
        assert evaluate_exact(parse_expression("-x^2"), 3) == -9
        assert evaluate_exact(parse_expression("1 - 2 * 3 + 4 / 2"), 0) == -3
        assert evaluate_exact(parse_expression("x^(-1)"), 4) == F(1, 4)

    def test_ln(self):
        assert parse_expression("ln(x)") == Ln(Var())

    def test_syntax_error_has_position(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_expression("x + * 2")
        assert info.value.position == 4

    def test_exponent_then_rational_literal(self):
        assert parse_expression("x^2/6") == Div(PowInt(Var(), 2), Const(6))
        assert parse_expression("x^2/6") == parse_expression("(x^2)/6")

    def test_implicit_multiplication_rejected(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_expression("2x")

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifier):
            parse_expression("sin(x)")


class TestFormat:
    def test_examples(self):
        assert format_expression(Var()) == "x"
        assert format_expression(Const(F(9, 10))) == "9/10"
        tangent = Div(Add(Mul(Const(F(2)), X), Const(F(1))), Const(F(27)))
        text = format_expression(tangent)
        assert parse_expression(text) == tangent
        assert text == "(2 * x + 1) / 27"


class TestEvaluate:
    def test_exact_examples(self):
        assert evaluate_exact(parse_expression("x/(x^3+8)"), 1) == F(1, 9)
        assert evaluate_exact(parse_expression("10*x^3 - 9*x^5"), 1) == 1
        assert evaluate_exact(parse_expression("-x*(12 - x^2)^(1/3)"), 2) == -4

    def test_irrational_value(self):
        with pytest.raises(IrrationalValue):
            evaluate_exact(parse_expression("x^(1/2)"), 2)
        with pytest.raises(IrrationalValue):
            evaluate_exact(Ln(X), 2)

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            evaluate_exact(parse_expression("1/x"), 0)

    def test_enclosure_examples(self):
        assert evaluate_enclosure(X, RatInterval(1, 2)) == RatInterval(1, 2)
        iv = evaluate_enclosure(parse_expression("-x*(12 - x^2)^(1/3)"), RatInterval(2, 2), F(1, 10**6))
        assert iv.contains(-4) and iv.width <= F(1, 10**6)
        assert evaluate_enclosure(Ln(X), RatInterval(1, 1)) == RatInterval(0, 0)

    def test_domain_violation(self):
        with pytest.raises(DomainViolation):
            evaluate_enclosure(Ln(X), RatInterval(-1, 1))
        with pytest.raises(DomainViolation):
            evaluate_enclosure(parse_expression("x^(1/2)"), RatInterval(-2, -1))

    def test_point_enclosure_of_irrational(self):
        iv = evaluate_point(parse_expression("x^(1/2)"), 2, F(1, 10**9))
        assert iv.lo ** 2 <= 2 <= iv.hi ** 2 and iv.width <= F(1, 10**9)


class TestDomain:
    def test_surd_endpoint(self):
        d = parse_domain("(0, sqrt(3))")
        assert isinstance(d.upper, Surd)
        assert d.contains(F(173, 100)) and not d.contains(F(174, 100))
        assert not d.contains(0)

    def test_two_sqrt3(self):
        d = parse_domain("(0, 2*sqrt(3))")
        assert d.contains(F(346, 100)) and not d.contains(F(347, 100))

    def test_sqrt_of_perfect_square(self):
        assert sqrt_of(F(9, 4)) == F(3, 2)

    def test_empty_domain_rejected(self):
        with pytest.raises(ValueError):
            DomainInterval.open(1, 1)

    def test_real_line(self):
        d = parse_domain("R")
        assert d.lower is None and d.upper is None and d.contains(-10**9)

    def test_intersect(self):
        a = parse_domain("(0, 4)")
        b = parse_domain("[1, +inf)")
        assert a.intersect(b) == DomainInterval(F(1), F(4), False, True)
        assert parse_domain("(0, 1)").intersect(parse_domain("[1, 2]")) is None


# -- random ASTs ---------------------------------------------------------------

consts = st.fractions(min_value=0, max_value=20, max_denominator=12).map(Const)
leaves = st.one_of(st.just(Var()), consts)


def _extend(children):
    return st.one_of(
        st.builds(Add, children, children),
        st.builds(Sub, children, children),
        st.builds(Mul, children, children),
        st.builds(Div, children, children),
        st.builds(Neg, children),
        st.builds(PowInt, children, st.integers(min_value=-3, max_value=4).filter(lambda n: n not in (0, 1))),
        st.builds(PowRat, children, st.sampled_from([F(1, 2), F(1, 3), F(2, 3), F(-1, 2)])),
        st.builds(Ln, children),
    )


asts = st.recursive(leaves, _extend, max_leaves=8)


@settings(max_examples=500, deadline=None)
@given(asts)
def test_format_parse_round_trip(e):
    assert parse_expression(format_expression(e)) == e


@settings(max_examples=300, deadline=None)
@given(asts, st.fractions(min_value=F(1, 10), max_value=5, max_denominator=20))
def test_exact_value_lies_in_point_enclosure(e, x):
    try:
        v = try_exact(e, x)
    except (DomainViolation, ArithmeticError):
        return
    if v is None:
        return
    try:
        iv = evaluate_point(e, x, F(1, 10**9))
    except (DomainViolation, ArithmeticError):
        return
    assert iv.contains(v)
