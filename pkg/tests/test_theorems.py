import random
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest

from septangent.cli import CORPUS_DIR, load_problem
from septangent.expr import DomainInterval, X, evaluate_exact, parse_domain, parse_expression
from septangent.numeric import RatInterval
from septangent.tangent import difference
from septangent.theorems import (
    Bound,
    Counterexample,
    GeneralL,
    InconsistentSpec,
    Monotone,
    NoCounterexample,
    NonPositiveValue,
    PowerSum,
    Product,
    ProblemSpec,
    SubClaimFailed,
    Sum,
    Verdict,
    check_theorem1,
    check_theorem2,
    check_theorem3,
    cubic_convexity_conditions,
    domain_split_prove,
    format_constraint,
    jensen_sample_check,
    monotonicity_check,
    parse_constraint,
    power_mean,
    theorem3_conditions,
)

P = parse_expression


def corpus_spec(name):
    return load_problem(CORPUS_DIR / f"{name}.ineq").spec


class TestConstraints:
    def test_round_trip(self):
        for text in ("sum = 4", "sum_pow 2 = 3", "product = 1", "sum_l 1 / (4 + x) = 1", "sum_pow -1/2 = 7"):
            assert format_constraint(parse_constraint(text)) == text
        assert parse_constraint("sum_l 1/(4+x) = 1") == parse_constraint("sum_l 1 / (4 + x) = 1")

    def test_kinds(self):
        assert parse_constraint("sum = 4") == Sum(4)
        assert isinstance(parse_constraint("product = 1"), Product)
        assert isinstance(parse_constraint("sum_l 1/(4 + x) = 1"), GeneralL)
        with pytest.raises(ValueError):
            PowerSum(F(0), F(1))
        with pytest.raises(ValueError):
            Product(F(0))

    def test_consistency(self):
        spec = ProblemSpec("bad", 4, P("x/(x^3+8)"), parse_domain("(0, 4)"), Sum(4), F(2), Bound.AT_MOST, F(4, 9))
        with pytest.raises(InconsistentSpec):
            spec.validate()
        spec.with_bound(F(1)).negated()
        assert corpus_spec("example2").constraint == GeneralL(P("1/(4 + x)"), F(1))


class TestPowerMean:
    def test_examples(self):
        assert power_mean(1, [1, 2, 3]) == RatInterval(2, 2)
        assert power_mean(0, [2, 8]) == RatInterval(4, 4)
        assert power_mean(2, [1, 7]) == RatInterval(5, 5)

    def test_enclosure(self):
        iv = power_mean(F(1, 2), [1, 2], F(1, 10**9))
        # ((1 + sqrt 2)/2)^2 = (3 + 2 sqrt 2)/4
        true = (3 + 2 * mpmath.sqrt(2)) / 4
        assert iv.lo <= F(str(true)) + F(1, 10**20) and F(str(true)) - F(1, 10**20) <= iv.hi
        assert iv.width <= F(1, 10**8)

    def test_non_positive(self):
        with pytest.raises(NonPositiveValue):
            power_mean(1, [1, 0])

    def test_monotone_in_alpha_on_500_tuples(self):
        rng = random.Random(11)
        exps = [F(-2), F(-1), F(-1, 2), F(0), F(1, 3), F(1, 2), F(1), F(3, 2), F(2), F(3)]
        for _ in range(500):
            vals = [F(rng.randint(1, 50), rng.randint(1, 10)) for _ in range(rng.randint(1, 5))]
            a, b = sorted(rng.sample(exps, 2))
            ca, cb = power_mean(a, vals, F(1, 10**9)), power_mean(b, vals, F(1, 10**9))
            assert ca.hi <= cb.lo + 2 * (ca.width + cb.width)


class TestTheorem1:
    def test_example4_applies(self):
        r = check_theorem1(P("-x*(12 - x^2)^(1/3)"), 2, 2, 3, parse_domain("(0, 2*sqrt(3))"))
        assert r.verdict is Verdict.APPLIES
        assert r.conclusion == -12
        assert (r.separator.k, r.separator.m) == (F(-4, 3), F(-4, 3))

    def test_baltic2005_condition(self):
        r = check_theorem1(P("-x/(x^2 + 2)"), 0, 1, 3, parse_domain("(0, +inf)"))
        assert r.verdict is Verdict.CONDITION_VIOLATED
        (c,) = r.failed_conditions
        assert (c.name, c.value) == ("f'(x0) >= 0", F(-1, 9))

    def test_identity(self):
        for x0, n in ((1, 3), (F(5, 2), 2)):
            r = check_theorem1(X, 1, x0, n, parse_domain("(0, +inf)"))
            assert r.verdict is Verdict.APPLIES and r.separation.method == "identity"

    def test_subdomain_is_closed(self):
        r = check_theorem1(P("-x*(12 - x^2)^(1/3)"), 2, 2, 3, parse_domain("(0, 2*sqrt(3))"))
        assert r.required_subdomain.upper_open  # clipped by the open domain end 2*sqrt(3)
        r = check_theorem1(P("1/(x^3 + 2)"), 2, 1, 2, parse_domain("(0, 5)"))
        assert not r.required_subdomain.upper_open

    def test_example1_tangent_line_unproven(self):
        r = check_theorem1(P("1/(x^3 + 2)"), 2, 1, 3, parse_domain("(0, sqrt(3))"))
        assert r.verdict is Verdict.SEPARATION_UNPROVEN


class TestTheorem2:
    def test_quartic(self):
        r = check_theorem2(P("x^4"), 3, 1, 3, parse_domain("R"))
        assert r.applies and (r.separator.k, r.separator.m) == (F(4, 3), F(-1, 3))

    def test_self(self):
        r = check_theorem2(P("x^3"), 3, 1, 3, parse_domain("(0, +inf)"))
        assert r.applies and r.separation.method == "identity"

    def test_baltic_reduces_to_tangent(self):
        r = check_theorem2(P("-x/(x^3 + 8)"), 1, 1, 4, parse_domain("(0, 4)"))
        assert r.applies
        assert r.separation.backend.quotient.primitive().coeffs == (8, 5, 2)


class TestTheorem3:
    def test_example5_family(self):
        for n in range(2, 11):
            r = check_theorem3(-1, 2, -1, 0, n, F(1, n))
            assert r.applies, n
            assert [c.value for c in r.conditions] == [F(2 * (n - 1), n), F(n - 2, n)]

    def test_remark3(self):
        r = check_theorem3(1, -1, 0, 0, 3, 1)
        assert r.applies
        assert [(c.value, c.passed) for c in r.conditions] == [(1, True), (4, True)]
        conv = cubic_convexity_conditions(1, -1, 3, 1)
        assert [(c.value, c.passed) for c in conv] == [(-1, False), (8, True)]

    def test_violation(self):
        r = check_theorem3(1, -5, 0, 0, 2, 1)
        assert r.verdict is Verdict.CONDITION_VIOLATED
        # grid oracle: x1 + x2 = 2 has a point with P(x1) + P(x2) < 2 P(1)
        p = lambda t: t**3 - 5 * t**2
        assert any(p(F(i, 100)) + p(2 - F(i, 100)) < 2 * p(F(1)) for i in range(201))

    def test_convexity_implies_theorem3_on_grid(self):
        vals = [F(-3), F(-1), F(-1, 2), F(1, 3), F(1), F(2)]
        for a in vals:
            for b in vals + [F(0)]:
                for n in (1, 2, 3, 5):
                    for x0 in (F(1, 4), F(1), F(3)):
                        if all(c.passed for c in cubic_convexity_conditions(a, b, n, x0)):
                            assert all(c.passed for c in theorem3_conditions(a, b, n, x0))
                            assert check_theorem3(a, b, 1, 0, n, x0).applies


class TestMonotonicity:
    def test_examples(self):
        f = P("10*x^3 - 9*x^5")
        assert monotonicity_check(f, DomainInterval.closed(F(9, 10), 1), Monotone.DECREASING).certified
        r = monotonicity_check(X, DomainInterval.closed(0, 1), Monotone.DECREASING)
        assert r.status == "Refuted" and r.value > 0
        assert monotonicity_check(P("x^3"), DomainInterval.closed(-1, 1), Monotone.INCREASING).certified


class TestDomainSplit:
    def test_example3(self):
        cert = domain_split_prove(corpus_spec("example3"), F(9, 10))
        assert cert.separation is not None and cert.monotonicity.certified
        assert cert.endpoint_value == 1 == cert.target
        assert cert.monotone_region == DomainInterval.closed(F(9, 10), 1)

    def test_threshold_half_fails_monotonicity(self):
        with pytest.raises(SubClaimFailed) as info:
            domain_split_prove(corpus_spec("example3"), F(1, 2))
        assert info.value.which == "iii"
        w = info.value.evidence.witness
        assert F(1, 2) <= w <= 1
        # f'(7/10) = 30*49/100 - 45*2401/10000 > 0
        assert F(30 * 49, 100) - F(45 * 2401, 10000) > 0

    def test_threshold_at_x0_fails(self):
        with pytest.raises(SubClaimFailed):
            domain_split_prove(corpus_spec("example3"), F(1, 3))

    def test_composition_soundness_on_1e5_samples(self):
        rng = np.random.default_rng(5)
        xs = rng.dirichlet([1.0, 1.0, 1.0], size=10**5)
        xs = xs[(xs > 0).all(axis=1)]
        total = (10 * xs**3 - 9 * xs**5).sum(axis=1)
        assert total.min() >= 1 - 1e-9


class TestAppliesIsBacked:
    @pytest.mark.parametrize(
        "f,report",
        [
            ("x^3 - x^2", lambda: check_theorem3(1, -1, 0, 0, 3, 1)),
            ("-x^3 + 2*x^2 - x", lambda: check_theorem3(-1, 2, -1, 0, 4, F(1, 4))),
            ("-x^3 + 2*x^2 - x", lambda: check_theorem3(-1, 2, -1, 0, 7, F(1, 7))),
        ],
    )
    def test_soundness_sampling(self, f, report):
        r = report()
        assert r.applies
        h = difference(P(f), r.separator)
        rng = random.Random(f)
        hull = r.required_subdomain
        lo, hi = hull.lower, hull.upper
        for _ in range(10**4):
            x = lo + (hi - lo) * F(rng.randint(0, 10**6), 10**6)
            assert evaluate_exact(h, x) >= 0


class TestFalsifier:
    def test_remark3(self):
        assert isinstance(jensen_sample_check(corpus_spec("remark3"), 10**5, 42), NoCounterexample)

    def test_example2(self):
        assert isinstance(jensen_sample_check(corpus_spec("example2"), 10**5, 42), NoCounterexample)

    def test_tightened_baltic(self):
        spec = corpus_spec("baltic2011")
        r = jensen_sample_check(spec.with_bound(F(4, 9) - F(1, 100)), 10**5, 42)
        assert isinstance(r, Counterexample)
        assert r.point == (1, 1, 1, 1) and r.lhs == F(4, 9)

    def test_deterministic(self):
        spec = corpus_spec("example3").with_bound(F(101, 100))
        a = jensen_sample_check(spec, 2000, 3)
        b = jensen_sample_check(spec, 2000, 3)
        assert a == b and isinstance(a, Counterexample)
        assert sum(evaluate_exact(P("10*x^3 - 9*x^5"), x) for x in a.point) < F(101, 100)
