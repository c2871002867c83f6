"""Sufficient conditions for Jensen's inequality at a point, power means, the
domain-split strategy, and a seeded falsifier used as a test oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Union

import numpy as np

from .calculus import DEFAULT_BUDGET, Sign, differentiate, expression_sign
from .expr import (
    X,
    DomainInterval,
    DomainViolation,
    Expr,
    ExpressionError,
    Ln,
    Surd,
    evaluate_enclosure,
    evaluate_point,
    format_expression,
    invert_enclosure,
    parse_expression,
    real_compare,
    sqrt_of,
    to_float_function,
    try_exact,
)
from .numeric import (
    NumericError,
    RatInterval,
    exact_root,
    format_rational,
    nth_root_enclosure,
    rational,
    rational_power,
    rational_power_interval,
)
from .poly import Polynomial
from .tangent import (
    Direction,
    SeparationFails,
    SeparationInconclusive,
    SeparationProof,
    Separator,
    build_separator,
    tangent_line,
    verify_separation,
)


class InconsistentSpec(ValueError):
    pass


class NonPositiveValue(ValueError):
    pass


# -- constraints and problems ------------------------------------------------


@dataclass(frozen=True)
class PowerSum:
    """x_1^alpha + ... + x_n^alpha = total (alpha = 1 is a plain sum)."""

    alpha: Fraction
    total: Fraction

    def __post_init__(self):
        a = rational(self.alpha)
        if a == 0:
            raise ValueError("PowerSum needs alpha != 0; use Product")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "total", rational(self.total))

    @property
    def l(self) -> Expr:
        return X if self.alpha == 1 else X ** self.alpha

    @property
    def l_total(self) -> Fraction:
        return self.total

    @property
    def is_sum(self) -> bool:
        return self.alpha == 1


def Sum(total) -> PowerSum:
    return PowerSum(Fraction(1), rational(total))


@dataclass(frozen=True)
class Product:
    """x_1 * ... * x_n = total (the alpha = 0 case)."""

    total: Fraction

    def __post_init__(self):
        t = rational(self.total)
        if t <= 0:
            raise ValueError("Product total must be positive")
        object.__setattr__(self, "total", t)

    @property
    def l(self) -> Expr:
        return Ln(X)

    @property
    def l_total(self) -> Fraction | None:
        """Exact total of ln x_j; only rational when the product is 1."""
        return Fraction(0) if self.total == 1 else None

    alpha = Fraction(0)
    is_sum = False


@dataclass(frozen=True)
class GeneralL:
    """l(x_1) + ... + l(x_n) = total."""

    l: Expr
    total: Fraction

    def __post_init__(self):
        object.__setattr__(self, "total", rational(self.total))

    @property
    def l_total(self) -> Fraction:
        return self.total

    alpha = None
    is_sum = False


Constraint = Union[PowerSum, Product, GeneralL]


def format_constraint(c: Constraint) -> str:
    """Text form used by problem files and certificates."""
    t = format_rational(c.total)
    if isinstance(c, Product):
        return f"product = {t}"
    if isinstance(c, PowerSum):
        return f"sum = {t}" if c.is_sum else f"sum_pow {format_rational(c.alpha)} = {t}"
    return f"sum_l {format_expression(c.l)} = {t}"


def parse_constraint(text: str) -> Constraint:
    head, sep, total = text.rpartition("=")
    if not sep:
        raise ValueError(f"constraint needs '= total': {text!r}")
    total = Fraction(total.strip())
    head = head.strip()
    if head == "sum":
        return Sum(total)
    if head == "product":
        return Product(total)
    kind, _, rest = head.partition(" ")
    if kind == "sum_pow":
        return PowerSum(Fraction(rest.strip()), total)
    if kind == "sum_l":
        return GeneralL(parse_expression(rest.strip()), total)
    raise ValueError(f"unknown constraint kind {kind!r}")


class Bound(Enum):
    AT_LEAST = "SumAtLeast"  # sum f >= bound
    AT_MOST = "SumAtMost"  # sum f <= bound

    @property
    def symbol(self) -> str:
        return ">=" if self is Bound.AT_LEAST else "<="


def constraint_consistent(c: Constraint, n: int, x0: Fraction) -> bool:
    if isinstance(c, Product):
        return x0 ** n == c.total
    if isinstance(c, PowerSum):
        v = rational_power(x0, c.alpha, Fraction(1, 10**30))
        return v.is_point and n * v.lo == c.total
    v = try_exact(c.l, x0)
    return v is not None and n * v == c.total


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    n: int
    f: Expr
    domain: DomainInterval
    constraint: Constraint
    x0: Fraction
    direction: Bound
    bound: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x0", rational(self.x0))
        object.__setattr__(self, "bound", rational(self.bound))

    def validate(self) -> "ProblemSpec":
        if self.n < 1:
            raise InconsistentSpec("n must be at least 1")
        if not self.domain.contains(self.x0):
            raise InconsistentSpec(f"x0 = {format_rational(self.x0)} is not in the domain {self.domain}")
        if not constraint_consistent(self.constraint, self.n, self.x0):
            raise InconsistentSpec(f"constraint is not satisfied by x1 = ... = xn = {format_rational(self.x0)}")
        return self

    def with_bound(self, bound) -> "ProblemSpec":
        return ProblemSpec(self.name, self.n, self.f, self.domain, self.constraint, self.x0, self.direction, bound)

    def negated(self) -> "ProblemSpec":
        """The same problem for -f with the direction reversed."""
        from .calculus import neg

        flipped = Bound.AT_MOST if self.direction is Bound.AT_LEAST else Bound.AT_LEAST
        return ProblemSpec(self.name, self.n, neg(self.f), self.domain, self.constraint, self.x0, flipped, -self.bound)


# -- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class Condition:
    name: str
    value: Fraction
    passed: bool


class Verdict(Enum):
    APPLIES = "Applies"
    CONDITION_VIOLATED = "ConditionViolated"
    SEPARATION_UNPROVEN = "SeparationUnproven"


@dataclass(frozen=True)
class TheoremReport:
    theorem: str
    conditions: tuple[Condition, ...]
    required_subdomain: DomainInterval | None
    separation: SeparationProof | None
    verdict: Verdict
    separator: Separator | None = None
    derivative_at_x0: Fraction | None = None
    conclusion: Fraction | None = None
    failure: Exception | None = field(default=None, compare=False)

    @property
    def applies(self) -> bool:
        return self.verdict is Verdict.APPLIES

    @property
    def failed_conditions(self) -> tuple[Condition, ...]:
        return tuple(c for c in self.conditions if not c.passed)


def _sign_condition(alpha: Fraction, fp: Fraction, theorem: int) -> Condition:
    """(alpha - 1) * f'(x0) <= 0 for T1, >= 0 for T2, named by the implied sign of f'(x0)."""
    want_nonneg = (alpha < 1) if theorem == 1 else (alpha > 1)
    if alpha == 1:
        op = "<=" if theorem == 1 else ">="
        return Condition(f"(alpha - 1) * f'(x0) {op} 0", Fraction(0), True)
    if want_nonneg:
        return Condition("f'(x0) >= 0", fp, fp >= 0)
    return Condition("f'(x0) <= 0", fp, fp <= 0)


def _positive_reals() -> DomainInterval:
    return DomainInterval(Fraction(0), None, True, True)


def _scaled_root(n: int, alpha: Fraction, x0: Fraction, upward: bool):
    """n^(1/alpha) * x0, exact (rational or surd) when possible, else rounded outward."""
    r = 1 / alpha
    if r.denominator == 1:
        return Fraction(n) ** int(r) * x0
    root = exact_root(Fraction(n) ** r.numerator if r.numerator > 0 else Fraction(1, n ** -r.numerator), r.denominator)
    if root is not None:
        return root * x0
    if r.denominator == 2:
        return sqrt_of(Fraction(n) ** r.numerator * x0 * x0) if r.numerator > 0 else sqrt_of(x0 * x0 / Fraction(n) ** -r.numerator)
    enc = rational_power(n, r, Fraction(1, 10**12))
    return (enc.hi if upward else enc.lo) * x0


def theorem1_subdomain(alpha: Fraction, x0: Fraction, n: int, domain: DomainInterval) -> DomainInterval | None:
    """Closed version of {x > 0 : x^alpha < n x0^alpha} intersected with the domain."""
    alpha, x0 = rational(alpha), rational(x0)
    if alpha > 0:
        region = DomainInterval(Fraction(0), _scaled_root(n, alpha, x0, True), True, False)
    elif alpha < 0:
        region = DomainInterval(_scaled_root(n, alpha, x0, False), None, False, True)
    else:
        region = _positive_reals()
    return domain.intersect(region)


def _derivative_at(f: Expr, x0: Fraction) -> Fraction:
    v = try_exact(differentiate(f), x0)
    if v is None:
        enc = evaluate_point(differentiate(f), x0, Fraction(1, 10**15))
        raise SeparationInconclusive(f"f'(x0) is irrational, enclosed in {enc}")
    return v


def _run_separation(f, s, sub, budget):
    try:
        return verify_separation(f, s, sub, Direction.F_ABOVE_G, budget), None
    except (SeparationFails, SeparationInconclusive) as exc:
        return None, exc


def check_theorem1(f: Expr, alpha, x0, n: int, domain: DomainInterval, budget: int = DEFAULT_BUDGET) -> TheoremReport:
    """Tangent line at x0 under c_alpha(x) = x0; concludes sum f(x_j) >= n f(x0)."""
    alpha, x0 = rational(alpha), rational(x0)
    fp = _derivative_at(f, x0)
    cond = _sign_condition(alpha, fp, 1)
    sub = theorem1_subdomain(alpha, x0, n, domain)
    conclusion = n * try_exact(f, x0) if try_exact(f, x0) is not None else None
    s = tangent_line(f, x0)
    if not cond.passed:
        return TheoremReport("T1", (cond,), sub, None, Verdict.CONDITION_VIOLATED, s, fp, conclusion)
    proof, exc = _run_separation(f, s, sub, budget)
    verdict = Verdict.APPLIES if proof else Verdict.SEPARATION_UNPROVEN
    return TheoremReport("T1", (cond,), sub, proof, verdict, s, fp, conclusion, exc)


def power_separator(f: Expr, alpha, x0) -> Separator:
    alpha = rational(alpha)
    l = X if alpha == 1 else X ** alpha
    return build_separator(f, l, x0)


def check_theorem2(f: Expr, alpha, x0, n: int, domain: DomainInterval, budget: int = DEFAULT_BUDGET) -> TheoremReport:
    """Power separator k x^alpha + m under a plain sum; concludes sum f(x_j) >= n f(x0)."""
    alpha, x0 = rational(alpha), rational(x0)
    if alpha == 0:
        raise ValueError("Theorem 2 needs alpha != 0")
    fp = _derivative_at(f, x0)
    cond = _sign_condition(alpha, fp, 2)
    sub = domain.intersect(DomainInterval(Fraction(0), n * x0, True, True))
    fx0 = try_exact(f, x0)
    conclusion = n * fx0 if fx0 is not None else None
    s = power_separator(f, alpha, x0)
    if not cond.passed:
        return TheoremReport("T2", (cond,), sub, None, Verdict.CONDITION_VIOLATED, s, fp, conclusion)
    proof, exc = _run_separation(f, s, sub, budget)
    verdict = Verdict.APPLIES if proof else Verdict.SEPARATION_UNPROVEN
    return TheoremReport("T2", (cond,), sub, proof, verdict, s, fp, conclusion, exc)


def cubic(a, b, c, d) -> Expr:
    return Polynomial.of(d, c, b, a).to_expr()


def theorem3_conditions(a, b, n: int, x0) -> tuple[Condition, Condition]:
    a, b, x0 = rational(a), rational(b), rational(x0)
    v1 = 2 * a * x0 + b
    v2 = (n + 2) * a * x0 + b
    return (
        Condition("2*a*x0 + b >= 0", v1, v1 >= 0),
        Condition("(n+2)*a*x0 + b >= 0", v2, v2 >= 0),
    )


def cubic_convexity_conditions(a, b, n: int, x0) -> tuple[Condition, Condition]:
    """P'' = 6ax + 2b >= 0 on [0, n x0] holds iff both of these hold."""
    a, b, x0 = rational(a), rational(b), rational(x0)
    v2 = 3 * n * a * x0 + b
    return (Condition("b >= 0", b, b >= 0), Condition("3*n*a*x0 + b >= 0", v2, v2 >= 0))


def check_theorem3(a, b, c, d, n: int, x0, budget: int = DEFAULT_BUDGET) -> TheoremReport:
    """Cubic P = a x^3 + b x^2 + c x + d, nonnegative x_j summing to n x0."""
    a, b, c, d, x0 = (rational(v) for v in (a, b, c, d, x0))
    if a == 0:
        raise ValueError("Theorem 3 needs a != 0")
    conds = theorem3_conditions(a, b, n, x0)
    p = cubic(a, b, c, d)
    sub = DomainInterval.closed(0, n * x0)
    s = tangent_line(p, x0)
    fp = try_exact(differentiate(p), x0)
    conclusion = n * try_exact(p, x0)
    if not all(cd.passed for cd in conds):
        return TheoremReport("T3", conds, sub, None, Verdict.CONDITION_VIOLATED, s, fp, conclusion)
    proof, exc = _run_separation(p, s, sub, budget)
    verdict = Verdict.APPLIES if proof else Verdict.SEPARATION_UNPROVEN
    return TheoremReport("T3", conds, sub, proof, verdict, s, fp, conclusion, exc)


def cubic_coefficients(f: Expr) -> tuple[Fraction, Fraction, Fraction, Fraction] | None:
    """(a, b, c, d) when f is a polynomial of degree exactly 3."""
    from .calculus import try_rational_function

    rf = try_rational_function(f)
    if rf is None or rf.denominator.degree != 0:
        return None
    p = rf.numerator
    if p.degree != 3:
        return None
    cs = p.coeffs
    return cs[3], cs[2], cs[1], cs[0]


# -- power means -------------------------------------------------------------


def power_mean(alpha, values, eps=Fraction(1, 10**12)) -> RatInterval:
    """Enclosure of c_alpha(values); the geometric mean when alpha = 0."""
    alpha, eps = rational(alpha), rational(eps)
    vals = [rational(v) for v in values]
    if not vals:
        raise ValueError("power mean of no values")
    if any(v <= 0 for v in vals):
        raise NonPositiveValue("power means need positive values")
    n = len(vals)
    if alpha == 0:
        prod = Fraction(1)
        for v in vals:
            prod *= v
        return nth_root_enclosure(prod, n, eps)
    tol = eps / (4 * n)
    total = RatInterval.point(0)
    for v in vals:
        total = total + rational_power(v, alpha, tol)
    mean = total / n
    if mean.is_point:
        return rational_power(mean.lo, 1 / alpha, eps)
    # widen tolerance handled by refinement on the final root
    out = rational_power_interval(mean, 1 / alpha, tol)
    return out


# -- monotonicity ------------------------------------------------------------


class Monotone(Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"


@dataclass(frozen=True)
class MonotonicityResult:
    status: str  # "Certified", "Refuted", "Inconclusive"
    witness: Fraction | None = None
    value: object = None

    @property
    def certified(self) -> bool:
        return self.status == "Certified"


def monotonicity_check(f: Expr, d: DomainInterval, want: Monotone, budget: int = DEFAULT_BUDGET) -> MonotonicityResult:
    """Certify f non-increasing / non-decreasing on d from the sign of f'."""
    res = expression_sign(differentiate(f), d, budget)
    good = Sign.NEGATIVE if want is Monotone.DECREASING else Sign.POSITIVE
    bad_sign = 1 if want is Monotone.DECREASING else -1
    if res.kind in (good, Sign.ZERO):
        return MonotonicityResult("Certified")
    if res.kind is Sign.MIXED or (res.kind in (Sign.POSITIVE, Sign.NEGATIVE) and res.kind is not good):
        for x, v in res.witnesses:
            if isinstance(v, RatInterval):
                strict = (v.lo > 0) if bad_sign > 0 else (v.hi < 0)
            else:
                strict = (v > 0) if bad_sign > 0 else (v < 0)
            if strict:
                return MonotonicityResult("Refuted", x, v)
        return MonotonicityResult("Inconclusive")
    return MonotonicityResult("Inconclusive")


# -- domain split ------------------------------------------------------------


class SubClaimFailed(Exception):
    def __init__(self, which: str, evidence):
        super().__init__(f"sub-claim ({which}) failed: {evidence}")
        self.which = which
        self.evidence = evidence


@dataclass(frozen=True)
class DomainSplitCertificate:
    """Evidence for the four sub-claims of the split at t.

    (i) tangent separation below t, (ii) f >= 0 on the domain,
    (iii) f non-increasing on [t, U], (iv) f(U) >= n f(x0).
    """

    t: Fraction
    upper: "Fraction | Surd"
    separator: Separator
    separation: SeparationProof | None
    lower_region: DomainInterval | None
    nonnegativity: object
    monotone_region: DomainInterval | None
    monotonicity: MonotonicityResult
    endpoint_value: object
    target: Fraction


def domain_split_prove(spec: ProblemSpec, t, budget: int = DEFAULT_BUDGET) -> DomainSplitCertificate:
    t = rational(t)
    if not (isinstance(spec.constraint, PowerSum) and spec.constraint.is_sum):
        raise ValueError("domain split needs a plain sum constraint")
    if spec.direction is not Bound.AT_LEAST:
        raise ValueError("domain split proves lower bounds; negate f first")
    f, d, x0 = spec.f, spec.domain, spec.x0
    target = spec.n * try_exact(f, x0)
    U = spec.n * x0
    upper = U
    upper_open = False
    if d.upper is not None:
        c = real_compare(d.upper, U)
        if c < 0:
            upper, upper_open = d.upper, d.upper_open
        elif c == 0:
            upper_open = d.upper_open
    s = tangent_line(f, x0)
    # (i)
    lower_region = d.intersect(DomainInterval(None, t, True, True))
    proof = None
    if lower_region is not None:
        try:
            proof = verify_separation(f, s, lower_region, Direction.F_ABOVE_G, budget)
        except (SeparationFails, SeparationInconclusive) as exc:
            raise SubClaimFailed("i", exc) from None
    # (ii)
    nonneg = expression_sign(f, d, budget)
    if nonneg.kind not in (Sign.POSITIVE, Sign.ZERO):
        raise SubClaimFailed("ii", nonneg)
    # (iii)
    if real_compare(t, upper) <= 0 and not (real_compare(t, upper) == 0 and upper_open):
        mono_region = d.intersect(DomainInterval(t, upper, False, upper_open))
    else:
        mono_region = None
    mono = MonotonicityResult("Certified")
    if mono_region is not None:
        mono = monotonicity_check(f, mono_region, Monotone.DECREASING, budget)
        if not mono.certified:
            raise SubClaimFailed("iii", mono)
    # (iv)
    if isinstance(upper, Surd):
        val = evaluate_enclosure(f, upper.enclosure(Fraction(1, 1 << 60)))
        ok = val.lo >= target
    else:
        v = try_exact(f, upper)
        val = v if v is not None else evaluate_point(f, upper)
        ok = (v >= target) if v is not None else val.lo >= target
    if not ok:
        raise SubClaimFailed("iv", val)
    return DomainSplitCertificate(t, upper, s, proof, lower_region, nonneg, mono_region, mono, val, target)


# -- falsifier ---------------------------------------------------------------


@dataclass(frozen=True)
class NoCounterexample:
    trials: int


@dataclass(frozen=True)
class Counterexample:
    point: tuple
    lhs: object
    rhs: Fraction


def _float_inverse(l: Expr, prefer_negative: bool = False):
    """Vectorised float inverse of a single-occurrence expression (screening only)."""
    from .expr import Add, Div, Mul, Neg, PowInt, PowRat, Sub, Var, contains_var

    steps = []
    node = l
    while not isinstance(node, Var):
        if isinstance(node, (Add, Sub, Mul, Div)):
            lx = contains_var(node.left)
            other = float(to_float_function(node.right if lx else node.left)(np.array([0.0]))[0])
            steps.append((type(node).__name__, lx, other))
            node = node.left if lx else node.right
        elif isinstance(node, Neg):
            steps.append(("Neg", True, 0.0))
            node = node.arg
        elif isinstance(node, (PowInt, PowRat)):
            r = Fraction(node.exponent)
            steps.append(("Pow", r.numerator % 2 == 0 or r.denominator % 2 == 0, float(r)))
            node = node.base
        elif isinstance(node, Ln):
            steps.append(("Ln", True, 0.0))
            node = node.arg
        else:
            raise ExpressionError("not invertible")

    def inv(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            for kind, flag, c in steps:
                if kind == "Add":
                    y = y - c
                elif kind == "Sub":
                    y = y + c if flag else c - y
                elif kind == "Mul":
                    y = y / c
                elif kind == "Div":
                    y = y * c if flag else c / y
                elif kind == "Neg":
                    y = -y
                elif kind == "Pow":
                    if flag:
                        y = np.where(y >= 0, np.abs(y) ** (1.0 / c), np.nan)
                        if prefer_negative:
                            y = -y
                    else:
                        y = np.sign(y) * np.abs(y) ** (1.0 / c)
                else:
                    y = np.exp(y)
        return y

    return inv


def _float_range(l: Expr, d: DomainInterval) -> tuple[float, float]:
    """Approximate range of l over d; infinite ends when l blows up."""
    pts = [float(p) for p in d.probe_points(2)]
    lo_end = -1e12 if d.lower is None else float(d.lower) + (1e-12 if d.lower_open else 0.0)
    hi_end = 1e12 if d.upper is None else float(d.upper) - (1e-12 if d.upper_open else 0.0)
    with np.errstate(all="ignore"):
        vals = to_float_function(l)(np.array(pts + [lo_end, hi_end]))
    vals = vals[np.isfinite(vals)]
    lo, hi = float(vals.min()), float(vals.max())
    return (-np.inf if lo < -1e9 else lo), (np.inf if hi > 1e9 else hi)


def _violates(spec: ProblemSpec, lhs: RatInterval) -> bool:
    if spec.direction is Bound.AT_LEAST:
        return lhs.hi < spec.bound
    return lhs.lo > spec.bound


def _confirm(spec: ProblemSpec, xs: list[RatInterval]):
    """Rigorous check of a candidate point given coordinate enclosures."""
    total = RatInterval.point(0)
    for xi in xs:
        if not (spec.domain.contains(xi.lo) and spec.domain.contains(xi.hi)):
            return None
        try:
            total = total + (evaluate_point(spec.f, xi.lo) if xi.is_point else evaluate_enclosure(spec.f, xi))
        except (DomainViolation, NumericError, ArithmeticError, ExpressionError):
            return None
    if _violates(spec, total):
        point = tuple(xi.lo if xi.is_point else xi.midpoint for xi in xs)
        lhs = total.lo if total.is_point else total
        return Counterexample(point, lhs, spec.bound)
    return None


_SCALE = 1 << 24


def jensen_sample_check(spec: ProblemSpec, trials: int = 10**5, seed: int = 0, eps=Fraction(1, 10**15)):
    """Seeded search for a feasible point violating the claimed bound.

    Trial 0 is the equality point (x0, ..., x0). Other samples are drawn on the
    constraint manifold in l-space with exact rational coordinates, screened
    in floating point, and any suspect is confirmed with exact or enclosure
    arithmetic, so a returned Counterexample is genuine.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    n = spec.n
    x0 = RatInterval.point(spec.x0)
    found = _confirm(spec, [x0] * n)
    if found:
        return found
    rng = np.random.default_rng(seed)
    ffun = to_float_function(spec.f)
    scale = abs(float(spec.bound)) + 1.0
    sign = 1.0 if spec.direction is Bound.AT_LEAST else -1.0
    c = spec.constraint
    remaining = trials - 1
    rounds = 0
    while remaining > 0 and rounds < 200:
        rounds += 1
        batch = max(1000, remaining * 2)
        if isinstance(c, Product):
            exact_rows, xf = _sample_product(spec, rng, batch)
        else:
            exact_rows, xf = _sample_lspace(spec, rng, batch)
        if xf is None:
            break
        ok = _float_in_domain(spec.domain, xf)
        with np.errstate(all="ignore"):
            lhs = ffun(xf).sum(axis=1)
        ok &= np.isfinite(lhs)
        idx = np.nonzero(ok)[0][:remaining]
        remaining -= len(idx)
        margin = sign * (lhs[idx] - float(spec.bound))
        suspects = idx[margin < 1e-9 * scale]
        for i in suspects[np.argsort(margin[margin < 1e-9 * scale])][:50]:
            xs = exact_rows(int(i))
            if xs is None:
                continue
            found = _confirm(spec, xs)
            if found:
                return found
    return NoCounterexample(trials - max(remaining, 0))


def _float_in_domain(d: DomainInterval, xf: np.ndarray) -> np.ndarray:
    ok = np.isfinite(xf).all(axis=1)
    if d.lower is not None:
        lo = float(d.lower)
        ok &= ((xf > lo) if d.lower_open else (xf >= lo)).all(axis=1)
    if d.upper is not None:
        hi = float(d.upper)
        ok &= ((xf < hi) if d.upper_open else (xf <= hi)).all(axis=1)
    return ok


def _sample_lspace(spec: ProblemSpec, rng, batch: int):
    c = spec.constraint
    n = spec.n
    l = c.l
    T = c.l_total
    lo, hi = _float_range(l, spec.domain)
    negative = spec.domain.upper is not None and real_compare(spec.domain.upper, 0) <= 0
    inv = _float_inverse(l, negative)
    Tf = float(T)
    if np.isfinite(lo) and np.isfinite(hi) and n > 1:
        # box sampling: n-1 free coordinates in [A, B], the last one forced
        A = Fraction(lo).limit_denominator(1 << 20)
        B = Fraction(hi).limit_denominator(1 << 20)
        u = rng.integers(0, _SCALE + 1, size=(batch, n - 1))
        # mix in simplex-style rows to reach the corners of the manifold
        w = rng.integers(0, _SCALE + 1, size=(batch, n))
        use_box = rng.integers(0, 2, size=batch).astype(bool)
        Af, Bf = float(A), float(B)
        yf = np.empty((batch, n))
        yf[:, :-1] = Af + (Bf - Af) * u / _SCALE
        yf[:, -1] = Tf - yf[:, :-1].sum(axis=1)
        W = w.sum(axis=1, keepdims=True)
        W[W == 0] = 1
        ys = Af + (Tf - n * Af) * w / W
        yf = np.where(use_box[:, None], yf, ys)

        def exact(i):
            if use_box[i]:
                ys_ = [A + (B - A) * Fraction(int(v), _SCALE) for v in u[i]]
                ys_.append(T - sum(ys_))
            else:
                Wi = int(w[i].sum()) or 1
                ys_ = [A + (T - n * A) * Fraction(int(v), Wi) for v in w[i]]
            return _invert_row(spec, ys_)

    elif np.isfinite(lo) or np.isfinite(hi) or n == 1:
        A = Fraction(lo if np.isfinite(lo) else hi).limit_denominator(1 << 20)
        w = rng.integers(0, _SCALE + 1, size=(batch, n))
        W = w.sum(axis=1, keepdims=True)
        W[W == 0] = 1
        Af = float(A)
        yf = Af + (Tf - n * Af) * w / W

        def exact(i):
            Wi = int(w[i].sum()) or 1
            return _invert_row(spec, [A + (T - n * A) * Fraction(int(v), Wi) for v in w[i]])

    else:
        R = Fraction(int(10 * (abs(Tf) + 1)))
        u = rng.integers(-_SCALE, _SCALE + 1, size=(batch, n))
        spread = 10.0 ** rng.integers(-2, 2, size=batch)
        sp = [Fraction(10) ** int(e) for e in np.log10(spread).round().astype(int)]
        mean = u.mean(axis=1, keepdims=True)
        yf = Tf / n + float(R) * spread[:, None] * (u - mean) / _SCALE

        def exact(i):
            row = [int(v) for v in u[i]]
            m = Fraction(sum(row), n)
            return _invert_row(spec, [T / n + R * sp[i] * (Fraction(v) - m) / _SCALE for v in row])

    with np.errstate(all="ignore"):
        xf = inv(yf)
    return exact, xf


def _invert_row(spec: ProblemSpec, ys):
    l = spec.constraint.l
    negative = spec.domain.upper is not None and real_compare(spec.domain.upper, 0) <= 0
    out = []
    for y in ys:
        try:
            out.append(invert_enclosure(l, y, Fraction(1, 1 << 60), prefer_negative=negative))
        except (ExpressionError, NumericError, ArithmeticError):
            return None
    return out


def _sample_product(spec: ProblemSpec, rng, batch: int):
    n = spec.n
    total = spec.constraint.total
    d = spec.domain
    lo = float(d.lower) if d.lower is not None and float(d.lower) > 0 else 1e-3
    hi = float(d.upper) if d.upper is not None else 1e3
    u = rng.uniform(np.log(lo), np.log(hi), size=(batch, max(n - 1, 0)))
    head = np.exp(u)
    num = (head * _SCALE).round().astype(np.int64)
    num[num == 0] = 1
    head = num / _SCALE
    last = float(total) / head.prod(axis=1)
    xf = np.concatenate([head, last[:, None]], axis=1)

    def exact(i):
        xs = [Fraction(int(v), _SCALE) for v in num[i]]
        p = Fraction(1)
        for v in xs:
            p *= v
        xs.append(total / p)
        return [RatInterval.point(v) for v in xs]

    return exact, xf


__all__ = [
    "Bound",
    "Condition",
    "Counterexample",
    "DomainSplitCertificate",
    "GeneralL",
    "InconsistentSpec",
    "Monotone",
    "MonotonicityResult",
    "NoCounterexample",
    "NonPositiveValue",
    "PowerSum",
    "ProblemSpec",
    "Product",
    "SubClaimFailed",
    "Sum",
    "TheoremReport",
    "Verdict",
    "check_theorem1",
    "check_theorem2",
    "check_theorem3",
    "cubic",
    "format_constraint",
    "parse_constraint",
    "cubic_coefficients",
    "cubic_convexity_conditions",
    "domain_split_prove",
    "jensen_sample_check",
    "monotonicity_check",
    "power_mean",
    "power_separator",
    "theorem1_subdomain",
    "theorem3_conditions",
]
