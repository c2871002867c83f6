"""Strategy orchestration, proof certificates, diagnosis and re-verification.

Strategies run in a fixed order: single variable (n = 1), the hinted
strategy, Theorem 3 for cubics under a sum constraint, Theorem 1 for power
sum and product constraints, a direct separator whose l matches the
constraint, and the domain split when a threshold is supplied. The first
success wins; otherwise a :class:`Diagnosis` collects every failed attempt.

Problems with an upper bound (``SumAtMost``) are proved as lower bounds for
-f; certificates are reported in the original orientation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction

from .calculus import DEFAULT_BUDGET, Sign, SignResult, differentiate, expression_sign, neg, try_rational_function
from .expr import (
    X,
    DomainInterval,
    Expr,
    ExpressionError,
    Ln,
    PowInt,
    PowRat,
    evaluate_enclosure,
    evaluate_exact,
    evaluate_point,
    format_expression,
    format_real,
    parse_domain,
    parse_expression,
    parse_real,
    real_compare,
    try_exact,
)
from .numeric import NumericError, RatInterval, format_rational
from .poly import NotDoubleRoot, Polynomial, SignKind, SignVerdict, parse_polynomial, sign_on_interval
from .tangent import (
    Direction,
    IdentityCertificate,
    IntervalCertificate,
    PolynomialCertificate,
    SeparationFails,
    SeparationInconclusive,
    SeparationProof,
    Separator,
    build_separator,
    separator_coefficients,
    difference,
    verify_separation,
)
from .theorems import (
    Bound,
    Condition,
    DomainSplitCertificate,
    GeneralL,
    MonotonicityResult,
    PowerSum,
    Product,
    ProblemSpec,
    SubClaimFailed,
    TheoremReport,
    Verdict,
    check_theorem1,
    check_theorem2,
    check_theorem3,
    cubic_coefficients,
    domain_split_prove,
    format_constraint,
    parse_constraint,
    theorem1_subdomain,
    theorem3_conditions,
)
from .theorems import _sign_condition


class Strategy(Enum):
    SINGLE_VARIABLE = "SingleVariable"
    DIRECT = "DirectSeparator"
    THEOREM1 = "Theorem1"
    THEOREM2 = "Theorem2"
    THEOREM3 = "Theorem3Cubic"
    DOMAIN_SPLIT = "DomainSplit"


_HINT_NAMES = {
    "direct": Strategy.DIRECT,
    "theorem1": Strategy.THEOREM1,
    "theorem2": Strategy.THEOREM2,
    "theorem3": Strategy.THEOREM3,
    "split": Strategy.DOMAIN_SPLIT,
}


def strategy_from_name(name: str) -> Strategy:
    key = name.strip()
    if key.lower() in _HINT_NAMES:
        return _HINT_NAMES[key.lower()]
    for s in Strategy:
        if s.value == key:
            return s
    raise ValueError(f"unknown strategy {name!r}")


@dataclass(frozen=True)
class Hints:
    strategy: Strategy | None = None
    separator: Expr | None = None
    split: Fraction | None = None
    budget: int = DEFAULT_BUDGET
    objective: str | None = None  # "sum" or "-sum"


@dataclass(frozen=True)
class ConclusionChain:
    """sum f  (>= or <=)  sum g = k * L + n * m = value  (relation)  bound.

    ``source`` says how L bounds sum l(x_j): "constraint" when it equals it,
    "power-mean" when the theorem's monotonicity step is used.
    """

    k: Fraction
    total: Fraction
    n: int
    m: Fraction
    value: Fraction
    bound: Fraction
    relation: str
    source: str
    stated_steps: tuple[str, ...] = field(default=(), compare=False)
    symbol: str = ">="  # the claimed inequality, ">=" or "<="

    @property
    def steps(self) -> tuple[str, ...]:
        k, L, m = (format_rational(v) for v in (self.k, self.total, self.m))
        if self.source in ("single", "split"):
            return (
                f"{self.n} * f(x0) = {self.n} * {m} = {format_rational(self.value)}",
                f"{format_rational(self.value)} {self.symbol} {format_rational(self.bound)}",
            )
        return (
            f"sum g = {k} * {L} + {self.n} * {m}",
            f"{k} * {L} + {self.n} * {m} = {format_rational(self.value)}",
            f"{format_rational(self.value)} {self.symbol} {format_rational(self.bound)}",
        )


def _relation(value: Fraction, bound: Fraction) -> str:
    return "=" if value == bound else (">" if value > bound else "<")


def _relation_ok(relation: str, value: Fraction, bound: Fraction, direction: Bound) -> bool:
    if _relation(value, bound) != relation:
        return False
    return value >= bound if direction is Bound.AT_LEAST else value <= bound


@dataclass(frozen=True)
class ProofCertificate:
    spec: ProblemSpec
    strategy: Strategy
    separator: Separator | None
    separation: SeparationProof | None
    theorem_report: TheoremReport | None
    chain: ConclusionChain
    negated: bool = False
    split: DomainSplitCertificate | None = None
    objective: str | None = None
    verdict: str = "Proven"

    @property
    def conclusion_chain(self) -> tuple[str, ...]:
        return self.chain.steps

    @property
    def objective_bound(self) -> str | None:
        """e.g. "max A = 12" for objective "-sum" of a lower bound -12."""
        if self.objective is None:
            return None
        sign = -1 if self.objective == "-sum" else 1
        b = sign * self.spec.bound
        lower = (self.spec.direction is Bound.AT_LEAST) == (sign > 0)
        return f"{'min' if lower else 'max'} A = {format_rational(b)}"


class Suggestion(Enum):
    TRY_LOG_SEPARATOR = "TryLogSeparator"
    TRY_POWER_SEPARATOR = "TryPowerSeparator"
    TRY_DOMAIN_SPLIT = "TryDomainSplit"
    NONE = "None"


@dataclass(frozen=True)
class Attempt:
    strategy: Strategy
    report: TheoremReport | None = None
    error: Exception | None = field(default=None, compare=False)
    l: Expr | None = None

    @property
    def summary(self) -> str:
        if self.report is not None:
            fails = ", ".join(f"{c.name} [{format_rational(c.value)}]" for c in self.report.failed_conditions)
            return f"{self.report.verdict.value}" + (f": {fails}" if fails else "") + (
                f" ({self.error})" if self.error is not None else ""
            )
        return str(self.error)


@dataclass(frozen=True)
class Diagnosis:
    failed_strategy: Strategy
    failed_conditions: tuple[Condition, ...]
    witness: Fraction | None
    suggestion: Suggestion
    alpha: Fraction | None = None
    attempts: tuple[Attempt, ...] = ()
    verdict: str = "Diagnosis"

    @property
    def suggestion_text(self) -> str:
        if self.suggestion is Suggestion.TRY_POWER_SEPARATOR and self.alpha is not None:
            return f"{self.suggestion.value}({format_rational(self.alpha)})"
        return self.suggestion.value


# -- helpers -----------------------------------------------------------------


def _oriented(spec: ProblemSpec) -> tuple[ProblemSpec, bool]:
    if spec.direction is Bound.AT_MOST:
        return spec.negated(), True
    return spec, False


def _direction(spec: ProblemSpec) -> Direction:
    return Direction.F_ABOVE_G if spec.direction is Bound.AT_LEAST else Direction.F_BELOW_G


def _positive_domain(d: DomainInterval) -> bool:
    return d.lower is not None and real_compare(d.lower, 0) >= 0 and (real_compare(d.lower, 0) > 0 or d.lower_open)


def _nonnegative_domain(d: DomainInterval) -> bool:
    return d.lower is not None and real_compare(d.lower, 0) >= 0


def _l_total(spec: ProblemSpec, l: Expr) -> Fraction | None:
    """n * l(x0), exact, when it is rational."""
    v = try_exact(l, spec.x0)
    return None if v is None else spec.n * v


def _chain(spec: ProblemSpec, s: Separator, source: str) -> ConclusionChain:
    L = _l_total(spec, s.l)
    if L is None:
        raise SeparationInconclusive("the constraint total of l is irrational")
    value = s.k * L + spec.n * s.m
    return ConclusionChain(
        s.k, L, spec.n, s.m, value, spec.bound, _relation(value, spec.bound), source, symbol=spec.direction.symbol
    )


def _check_chain(spec: ProblemSpec, chain: ConclusionChain) -> None:
    if not _relation_ok(chain.relation, chain.value, spec.bound, spec.direction):
        raise SeparationInconclusive(
            f"separator total {format_rational(chain.value)} does not give the bound {format_rational(spec.bound)}"
        )


def _constraint_l(spec: ProblemSpec) -> Expr:
    return spec.constraint.l


def _original_separation(spec: ProblemSpec, s: Separator, d: DomainInterval, budget: int) -> SeparationProof:
    return verify_separation(spec.f, s, d, _direction(spec), budget)


# -- strategies --------------------------------------------------------------


def _single_variable(spec: ProblemSpec) -> ProofCertificate | None:
    """n = 1: the constraint pins x1 = x0 when l is strictly monotone on the domain."""
    if spec.n != 1:
        return None
    c = spec.constraint
    l = c.l
    mono = expression_sign(differentiate(l), spec.domain)
    if not (mono.certified and mono.strict) and not isinstance(c, PowerSum):
        return None
    if isinstance(c, PowerSum) and not (mono.certified and mono.strict):
        if not (c.alpha.numerator % 2 == 1 and c.alpha.denominator % 2 == 1) and not _positive_domain(spec.domain):
            if not (_nonnegative_domain(spec.domain) and c.alpha > 0):
                return None
    v = try_exact(spec.f, spec.x0)
    if v is None:
        return None
    chain = ConclusionChain(
        Fraction(0), Fraction(0), 1, v, v, spec.bound, _relation(v, spec.bound), "single", symbol=spec.direction.symbol
    )
    if not _relation_ok(chain.relation, v, spec.bound, spec.direction):
        return None
    return ProofCertificate(spec, Strategy.SINGLE_VARIABLE, None, None, None, chain, spec.direction is Bound.AT_MOST)


def _direct(spec: ProblemSpec, l: Expr, budget: int) -> ProofCertificate:
    s = build_separator(spec.f, l, spec.x0)
    if isinstance(spec.constraint, Product) and isinstance(l, Ln):
        if spec.constraint.l_total is None:
            raise SeparationInconclusive("ln of the product total is irrational")
    elif l != _constraint_l(spec):
        raise SeparationInconclusive("direct separator needs l to match the constraint")
    chain = _chain(spec, s, "constraint")
    _check_chain(spec, chain)
    proof = _original_separation(spec, s, spec.domain, budget)
    return ProofCertificate(spec, Strategy.DIRECT, s, proof, None, chain, spec.direction is Bound.AT_MOST)


def _theorem_certificate(spec: ProblemSpec, report: TheoremReport, strategy: Strategy, budget: int) -> ProofCertificate:
    work_s = report.separator
    negated = spec.direction is Bound.AT_MOST
    s = work_s.negated() if negated else work_s
    sub = report.required_subdomain
    proof = _original_separation(spec, s, sub, budget) if not negated else verify_separation(
        spec.f, s, sub, Direction.F_BELOW_G, budget
    )
    chain = _chain(spec, s, "power-mean")
    _check_chain(spec, chain)
    return ProofCertificate(spec, strategy, s, proof, report, chain, negated)


def _theorem1(spec: ProblemSpec, budget: int) -> tuple[ProofCertificate | None, Attempt | None]:
    c = spec.constraint
    if not isinstance(c, (PowerSum, Product)) or (isinstance(c, PowerSum) and c.is_sum):
        return None, None
    if not _positive_domain(spec.domain) or spec.x0 <= 0:
        return None, None
    work, _ = _oriented(spec)
    try:
        report = check_theorem1(work.f, c.alpha, spec.x0, spec.n, spec.domain, budget)
    except (SeparationInconclusive, ExpressionError, NumericError) as exc:
        return None, Attempt(Strategy.THEOREM1, None, exc)
    if report.conclusion is None or not _relation_ok(
        _relation(report.conclusion, work.bound), report.conclusion, work.bound, Bound.AT_LEAST
    ):
        return None, Attempt(Strategy.THEOREM1, report, SeparationInconclusive("conclusion does not reach the bound"))
    if not report.applies:
        return None, Attempt(Strategy.THEOREM1, report, report.failure)
    try:
        return _theorem_certificate(spec, report, Strategy.THEOREM1, budget), None
    except (SeparationFails, SeparationInconclusive) as exc:
        return None, Attempt(Strategy.THEOREM1, report, exc)


def _theorem2(spec: ProblemSpec, l: Expr | None, budget: int) -> tuple[ProofCertificate | None, Attempt | None]:
    c = spec.constraint
    if not (isinstance(c, PowerSum) and c.is_sum) or not _positive_domain(spec.domain):
        return None, None
    alpha = Fraction(1)
    if isinstance(l, (PowInt, PowRat)) and l.base == X:
        alpha = Fraction(l.exponent)
    work, _ = _oriented(spec)
    report = check_theorem2(work.f, alpha, spec.x0, spec.n, spec.domain, budget)
    if not report.applies:
        return None, Attempt(Strategy.THEOREM2, report, report.failure)
    try:
        return _theorem_certificate(spec, report, Strategy.THEOREM2, budget), None
    except (SeparationFails, SeparationInconclusive) as exc:
        return None, Attempt(Strategy.THEOREM2, report, exc)


def _theorem3(spec: ProblemSpec, budget: int) -> tuple[ProofCertificate | None, Attempt | None]:
    c = spec.constraint
    if not (isinstance(c, PowerSum) and c.is_sum) or not _nonnegative_domain(spec.domain) or spec.x0 <= 0:
        return None, None
    work, negated = _oriented(spec)
    coeffs = cubic_coefficients(work.f)
    if coeffs is None:
        return None, None
    a, b, cc, d = coeffs
    report = check_theorem3(a, b, cc, d, spec.n, spec.x0, budget)
    if report.conclusion < work.bound:
        return None, Attempt(Strategy.THEOREM3, report, SeparationInconclusive("conclusion does not reach the bound"))
    if not report.applies:
        return None, Attempt(Strategy.THEOREM3, report, report.failure)
    s = report.separator.negated() if negated else report.separator
    proof = verify_separation(spec.f, s, report.required_subdomain, _direction(spec), budget)
    chain = _chain(spec, s, "constraint")
    _check_chain(spec, chain)
    return ProofCertificate(spec, Strategy.THEOREM3, s, proof, report, chain, negated), None


def _domain_split(spec: ProblemSpec, t: Fraction, budget: int) -> ProofCertificate:
    work, negated = _oriented(spec)
    split = domain_split_prove(work, t, budget)
    s = split.separator.negated() if negated else split.separator
    chain = ConclusionChain(
        Fraction(0), Fraction(0), spec.n, split.target / spec.n * (-1 if negated else 1),
        split.target * (-1 if negated else 1), spec.bound, "", "split", symbol=spec.direction.symbol,
    )
    chain = replace(chain, relation=_relation(chain.value, spec.bound))
    _check_chain(spec, chain)
    return ProofCertificate(spec, Strategy.DOMAIN_SPLIT, s, None, None, chain, negated, split)


def prove(spec: ProblemSpec, hints: Hints | None = None) -> ProofCertificate | Diagnosis:
    hints = hints or Hints()
    spec.validate()
    budget = hints.budget
    attempts: list[Attempt] = []

    def finish(cert: ProofCertificate) -> ProofCertificate:
        return replace(cert, objective=hints.objective)

    cert = _single_variable(spec)
    if cert is not None:
        return finish(cert)

    def run(strategy: Strategy, l: Expr | None = None):
        try:
            if strategy is Strategy.THEOREM1:
                return _theorem1(spec, budget)
            if strategy is Strategy.THEOREM2:
                return _theorem2(spec, l, budget)
            if strategy is Strategy.THEOREM3:
                return _theorem3(spec, budget)
            if strategy is Strategy.DIRECT:
                ll = l if l is not None else _constraint_l(spec)
                return _direct(spec, ll, budget), None
            if strategy is Strategy.DOMAIN_SPLIT:
                if hints.split is None:
                    return None, None
                return _domain_split(spec, hints.split, budget), None
        except (SeparationFails, SeparationInconclusive, SubClaimFailed, ExpressionError, NumericError, ValueError) as exc:
            return None, Attempt(strategy, None, exc, l)
        return None, None

    order: list[tuple[Strategy, Expr | None]] = []
    if hints.strategy is not None:
        order.append((hints.strategy, hints.separator))
    elif hints.separator is not None:
        order.append((Strategy.DIRECT, hints.separator))
    order += [
        (Strategy.THEOREM3, None),
        (Strategy.THEOREM1, None),
        (Strategy.DIRECT, None),
        (Strategy.DOMAIN_SPLIT, None),
    ]
    seen = set()
    for strategy, l in order:
        key = (strategy, l)
        if key in seen:
            continue
        seen.add(key)
        cert, attempt = run(strategy, l)
        if cert is not None:
            return finish(cert)
        if attempt is not None:
            attempts.append(attempt)
    return _diagnosis(spec, attempts)


def _witness(exc) -> Fraction | None:
    if isinstance(exc, SeparationFails):
        return exc.witness
    if isinstance(exc, SubClaimFailed) and isinstance(exc.evidence, SeparationFails):
        return exc.evidence.witness
    if isinstance(exc, SubClaimFailed) and isinstance(exc.evidence, MonotonicityResult):
        return exc.evidence.witness
    return None


def _diagnosis(spec: ProblemSpec, attempts: list[Attempt]) -> Diagnosis:
    c = spec.constraint
    for a in attempts:
        if a.report is not None and a.report.failed_conditions:
            if isinstance(c, Product):
                suggestion, alpha = Suggestion.TRY_LOG_SEPARATOR, None
            elif isinstance(c, PowerSum) and not c.is_sum:
                suggestion, alpha = Suggestion.TRY_POWER_SEPARATOR, c.alpha
            else:
                suggestion, alpha = Suggestion.TRY_DOMAIN_SPLIT, None
            w = next((_witness(b.error) for b in attempts if _witness(b.error) is not None), None)
            return Diagnosis(a.strategy, a.report.failed_conditions, w, suggestion, alpha, tuple(attempts))
    for a in attempts:
        w = _witness(a.error) or (_witness(a.report.failure) if a.report is not None else None)
        if w is not None:
            return Diagnosis(a.strategy, (), w, Suggestion.TRY_DOMAIN_SPLIT, None, tuple(attempts))
    last = attempts[-1].strategy if attempts else Strategy.DIRECT
    return Diagnosis(last, (), None, Suggestion.NONE, None, tuple(attempts))


# -- diagnose ----------------------------------------------------------------


@dataclass(frozen=True)
class CandidateReport:
    l: Expr
    strategy: str
    conditions: tuple[Condition, ...]
    score: int

    @property
    def label(self) -> str:
        return format_expression(self.l)


def _candidates(spec: ProblemSpec) -> list[Expr]:
    cands: list[Expr] = [X, X ** 2, X ** 3, Ln(X)]
    c = spec.constraint
    if isinstance(c, GeneralL) and c.l not in cands:
        cands.append(c.l)
    return cands


def diagnose(spec: ProblemSpec) -> list[CandidateReport]:
    """Rank separator families by the cheap sign conditions of Theorems 1 and 2.

    No separation is run. A family whose l matches the constraint ranks first
    (the constraint turns sum g into a constant); then families whose theorem
    condition holds; then families no theorem covers; failing ones come last.
    """
    work, _ = _oriented(spec)
    c = spec.constraint
    try:
        fp = evaluate_exact(differentiate(work.f), spec.x0)
    except ExpressionError:
        fp = evaluate_point(differentiate(work.f), spec.x0).midpoint
    out = []
    for l in _candidates(spec):
        conds: tuple[Condition, ...] = ()
        if l == c.l:
            strategy, score = "DirectSeparator", 2
        elif l == X and isinstance(c, (PowerSum, Product)):
            alpha = c.alpha
            value = (alpha - 1) * fp
            conds = (Condition("(alpha - 1) * f'(x0) <= 0", value, value <= 0),)
            strategy, score = "Theorem1", 1 if conds[0].passed else -1
        elif isinstance(c, PowerSum) and c.is_sum and isinstance(l, PowInt):
            value = (l.exponent - 1) * fp
            conds = (Condition("(alpha - 1) * f'(x0) >= 0", value, value >= 0),)
            strategy, score = "Theorem2", 1 if conds[0].passed else -1
        else:
            strategy, score = "Uncovered", 0
        out.append(CandidateReport(l, strategy, conds, score))
    return sorted(out, key=lambda r: -r.score)


# -- verification ------------------------------------------------------------


@dataclass(frozen=True)
class Valid:
    ok = True


@dataclass(frozen=True)
class Invalid:
    reason: str
    ok = False


class _Reject(Exception):
    pass


def _verify_separation(f: Expr, s: Separator, p: SeparationProof) -> None:
    if p.separator != s:
        raise _Reject("separator mismatch")
    b = p.backend
    sigma = p.direction.sign
    if isinstance(b, IdentityCertificate):
        if not (s.k == 1 and s.m == 0 and s.l == f):
            raise _Reject("identity certificate for a non-identity separator")
        return
    h = difference(f, s)
    if isinstance(b, PolynomialCertificate):
        rf = try_rational_function(h)
        if rf is None or rf.numerator != b.numerator or rf.denominator != b.denominator:
            raise _Reject("f - g does not match the stored numerator and denominator")
        if b.sigma != sigma or b.tau not in (1, -1):
            raise _Reject("orientation signs are inconsistent")
        q_sign = sign_on_interval(b.denominator, p.domain)
        if not (q_sign.nonnegative if b.tau > 0 else q_sign.nonpositive) or (
            b.denominator.degree > 0 and q_sign.root_count > 0
        ):
            raise _Reject("denominator sign is not certified")
        factor = Polynomial.of(s.x0 * s.x0, -2 * s.x0, 1)
        if (factor * b.quotient).scale(sigma * b.tau) != b.numerator:
            raise _Reject("reconstruction mismatch")
        v = sign_on_interval(b.quotient, p.domain)
        if not v.nonnegative or v.kind != b.quotient_sign.kind:
            raise _Reject("quotient sign verdict does not hold")
        return
    if isinstance(b, IntervalCertificate):
        if b.sigma != sigma:
            raise _Reject("orientation signs are inconsistent")
        if evaluate_exact(h, s.x0) != 0 or evaluate_exact(differentiate(h), s.x0) != 0:
            raise _Reject("tangency at x0 does not hold")
        hull = p.domain.closure_hull()
        if not (b.hull.lo <= hull.lo and hull.hi <= b.hull.hi):
            raise _Reject("interval hull does not cover the domain")
        sh = h if sigma > 0 else neg(h)
        d2 = differentiate(differentiate(sh))
        _check_cover(d2, b.curvature, b.neighborhood, "curvature")
        if not b.neighborhood.contains(s.x0):
            raise _Reject("curvature neighbourhood misses x0")
        pieces = []
        if b.hull.lo < b.neighborhood.lo:
            pieces.append(RatInterval(b.hull.lo, b.neighborhood.lo))
        if b.neighborhood.hi < b.hull.hi:
            pieces.append(RatInterval(b.neighborhood.hi, b.hull.hi))
        boxes = list(b.boxes)
        for piece in pieces:
            _check_cover(sh, [bx for bx in boxes if piece.lo <= bx[0].lo and bx[0].hi <= piece.hi], piece, "value")
        return
    raise _Reject("unknown separation backend")


def _check_cover(e: Expr, boxes, region: RatInterval, what: str) -> None:
    ordered = sorted((bx for bx, _ in boxes), key=lambda r: r.lo)
    pos = region.lo
    for bx in ordered:
        if bx.lo > pos:
            raise _Reject(f"{what} boxes leave a gap at {format_rational(pos)}")
        try:
            enc = evaluate_enclosure(e, bx)
        except (ExpressionError, NumericError, ArithmeticError):
            raise _Reject(f"{what} box could not be evaluated") from None
        if enc.lo < 0:
            raise _Reject(f"{what} enclosure is not nonnegative on a box")
        pos = max(pos, bx.hi)
    if pos < region.hi:
        raise _Reject(f"{what} boxes stop at {format_rational(pos)}")


def _verify_chain(cert: ProofCertificate) -> None:
    spec, ch = cert.spec, cert.chain
    if ch.stated_steps and ch.stated_steps != ch.steps:
        raise _Reject("conclusion arithmetic: written steps differ from the stated numbers")
    if ch.bound != spec.bound:
        raise _Reject("conclusion arithmetic: bound in the chain differs from the problem bound")
    if ch.n != spec.n:
        raise _Reject("conclusion arithmetic: n mismatch")
    if cert.strategy is Strategy.SINGLE_VARIABLE:
        if cert.spec.n != 1 or evaluate_exact(spec.f, spec.x0) != ch.value:
            raise _Reject("conclusion arithmetic: single-variable value mismatch")
    elif cert.strategy is Strategy.DOMAIN_SPLIT:
        if spec.n * evaluate_exact(spec.f, spec.x0) != ch.value:
            raise _Reject("conclusion arithmetic: n * f(x0) mismatch")
    else:
        s = cert.separator
        if (ch.k, ch.m) != (s.k, s.m):
            raise _Reject("conclusion arithmetic: chain coefficients differ from the separator")
        if spec.n * evaluate_exact(s.l, spec.x0) != ch.total:
            raise _Reject("conclusion arithmetic: l total mismatch")
        if ch.source == "constraint":
            c = spec.constraint
            if not isinstance(c, Product) and not (isinstance(c, PowerSum) and c.is_sum and s.l == X) and c.l != s.l:
                raise _Reject("conclusion arithmetic: l does not match the constraint")
        if ch.k * ch.total + ch.n * ch.m != ch.value:
            raise _Reject("conclusion arithmetic: k * L + n * m differs from the stated value")
    if not _relation_ok(ch.relation, ch.value, spec.bound, spec.direction):
        raise _Reject("conclusion arithmetic: the value does not reach the bound")


def _verify_theorem(cert: ProofCertificate) -> None:
    spec = cert.spec
    work, _ = _oriented(spec)
    r = cert.theorem_report
    if r is None:
        raise _Reject("missing theorem report")
    if cert.strategy is Strategy.THEOREM3:
        coeffs = cubic_coefficients(work.f)
        if coeffs is None:
            raise _Reject("function is not a cubic")
        fresh = theorem3_conditions(coeffs[0], coeffs[1], spec.n, spec.x0)
        sub = DomainInterval.closed(0, spec.n * spec.x0)
    elif cert.strategy is Strategy.THEOREM1:
        fp = evaluate_exact(differentiate(work.f), spec.x0)
        fresh = (_sign_condition(spec.constraint.alpha, fp, 1),)
        sub = theorem1_subdomain(spec.constraint.alpha, spec.x0, spec.n, spec.domain)
    else:
        fp = evaluate_exact(differentiate(work.f), spec.x0)
        alpha = Fraction(1) if cert.separator.l == X else Fraction(cert.separator.l.exponent)
        fresh = (_sign_condition(alpha, fp, 2),)
        sub = spec.domain.intersect(DomainInterval(Fraction(0), spec.n * spec.x0, True, True))
    if tuple(fresh) != tuple(r.conditions) or not all(c.passed for c in fresh):
        raise _Reject("theorem conditions do not re-evaluate to the stored values")
    if str(sub) != str(cert.separation.domain):
        raise _Reject("separation domain differs from the theorem's required subdomain")


def _verify_split(cert: ProofCertificate) -> None:
    work, _ = _oriented(cert.spec)
    stored = cert.split
    try:
        fresh = domain_split_prove(work, stored.t)
    except SubClaimFailed as exc:
        raise _Reject(f"domain split sub-claim fails on re-check: {exc}") from None
    if format_real(fresh.upper) != format_real(stored.upper) or fresh.target != stored.target:
        raise _Reject("domain split endpoint data mismatch")
    if stored.separation is not None:
        _verify_separation(work.f, stored.separator, stored.separation)


def verify_certificate(cert: ProofCertificate) -> Valid | Invalid:
    """Re-derive every intermediate from the problem data and the quotient."""
    try:
        try:
            cert.spec.validate()
        except ValueError as exc:
            raise _Reject(f"problem is inconsistent: {exc}") from None
        if cert.strategy not in (Strategy.SINGLE_VARIABLE, Strategy.DOMAIN_SPLIT):
            s = cert.separator
            k, m = separator_coefficients(cert.spec.f, s.l, cert.spec.x0)
            if (k, m) != (s.k, s.m) or s.x0 != cert.spec.x0:
                raise _Reject("separator coefficients do not satisfy the tangency conditions")
            if cert.separation is None or cert.separation.direction is not _direction(cert.spec):
                raise _Reject("separation direction does not match the problem")
            if cert.strategy is Strategy.DIRECT and str(cert.separation.domain) != str(cert.spec.domain):
                raise _Reject("separation domain differs from the problem domain")
            _verify_separation(cert.spec.f, s, cert.separation)
            if cert.strategy in (Strategy.THEOREM1, Strategy.THEOREM2, Strategy.THEOREM3):
                _verify_theorem(cert)
        elif cert.strategy is Strategy.DOMAIN_SPLIT:
            _verify_split(cert)
        _verify_chain(cert)
    except _Reject as exc:
        return Invalid(str(exc))
    except (ExpressionError, NumericError, ArithmeticError, NotDoubleRoot) as exc:
        return Invalid(f"re-check failed: {exc}")
    return Valid()


# -- text serialization ------------------------------------------------------
#
# A certificate is a sequence of "[section]" headers, each followed by
# "key = value" lines. Rationals are written "p/q", polynomials and
# expressions in the parser's grammar, intervals as "[lo, hi]". Repeated
# keys (condition, box, step) keep their order. Writing a parsed document
# reproduces it byte for byte.


class CertificateFormatError(ValueError):
    pass


def _q(v: Fraction) -> str:
    return format_rational(v)


def _iv(r: RatInterval) -> str:
    return f"[{_q(r.lo)}, {_q(r.hi)}]"


def _parse_iv(text: str) -> RatInterval:
    t = text.strip()
    if not (t.startswith("[") and t.endswith("]")):
        raise CertificateFormatError(f"bad interval {text!r}")
    lo, _, hi = t[1:-1].partition(",")
    return RatInterval(Fraction(lo.strip()), Fraction(hi.strip()))


def _value_text(v) -> str:
    return _iv(v) if isinstance(v, RatInterval) else _q(v)


def _parse_value(text: str):
    return _parse_iv(text) if text.strip().startswith("[") else Fraction(text.strip())


def _opt(v, fmt=str) -> str:
    return "none" if v is None else fmt(v)


def _problem_lines(spec: ProblemSpec) -> list[tuple[str, str]]:
    return [
        ("name", spec.name),
        ("n", str(spec.n)),
        ("function", format_expression(spec.f)),
        ("domain", str(spec.domain)),
        ("constraint", format_constraint(spec.constraint)),
        ("point", _q(spec.x0)),
        ("direction", spec.direction.value),
        ("bound", _q(spec.bound)),
    ]


def _separator_lines(s: Separator) -> list[tuple[str, str]]:
    return [
        ("l", format_expression(s.l)),
        ("k", _q(s.k)),
        ("m", _q(s.m)),
        ("x0", _q(s.x0)),
        ("g", format_expression(s.g)),
    ]


def _separation_lines(p: SeparationProof) -> list[tuple[str, str]]:
    out = [("method", p.method), ("direction", p.direction.value), ("domain", str(p.domain))]
    b = p.backend
    if isinstance(b, PolynomialCertificate):
        out += [
            ("numerator", b.numerator.to_text()),
            ("denominator", b.denominator.to_text()),
            ("tau", str(b.tau)),
            ("sigma", str(b.sigma)),
            ("quotient", b.quotient.to_factored_text()),
            ("denominator_sign", b.denominator_sign.kind.value),
            ("denominator_roots", str(b.denominator_sign.root_count)),
            ("quotient_sign", b.quotient_sign.kind.value),
            ("quotient_roots", str(b.quotient_sign.root_count)),
        ]
    elif isinstance(b, IntervalCertificate):
        out += [("sigma", str(b.sigma)), ("hull", _iv(b.hull)), ("neighborhood", _iv(b.neighborhood))]
        out += [("curvature_box", f"{_iv(x)} : {_iv(e)}") for x, e in b.curvature]
        out += [("value_box", f"{_iv(x)} : {_iv(e)}") for x, e in b.boxes]
    return out


def _theorem_lines(r: TheoremReport) -> list[tuple[str, str]]:
    out = [("theorem", r.theorem)]
    out += [("condition", f"{c.name} | {_q(c.value)} | {'pass' if c.passed else 'fail'}") for c in r.conditions]
    out += [
        ("subdomain", _opt(r.required_subdomain)),
        ("verdict", r.verdict.value),
        ("derivative", _opt(r.derivative_at_x0, _q)),
        ("conclusion", _opt(r.conclusion, _q)),
    ]
    return out


def _split_lines(sp: DomainSplitCertificate) -> list[tuple[str, str]]:
    return [
        ("t", _q(sp.t)),
        ("upper", format_real(sp.upper)),
        ("lower_region", _opt(sp.lower_region)),
        ("nonnegativity", sp.nonnegativity.kind.value),
        ("monotone_region", _opt(sp.monotone_region)),
        ("monotonicity", sp.monotonicity.status),
        ("endpoint_value", _value_text(sp.endpoint_value)),
        ("target", _q(sp.target)),
    ]


def _chain_lines(cert: ProofCertificate) -> list[tuple[str, str]]:
    ch = cert.chain
    out = [
        ("source", ch.source),
        ("k", _q(ch.k)),
        ("total", _q(ch.total)),
        ("n", str(ch.n)),
        ("m", _q(ch.m)),
        ("value", _q(ch.value)),
        ("relation", ch.relation),
        ("bound", _q(ch.bound)),
    ]
    out += [("step", st) for st in (ch.stated_steps or ch.steps)]
    out.append(("objective", _opt(cert.objective)))
    out.append(("objective_bound", _opt(cert.objective_bound)))
    return out


def _render(sections: list[tuple[str, list[tuple[str, str]]]]) -> str:
    lines = []
    for name, fields in sections:
        lines.append(f"[{name}]")
        lines += [f"{k} = {v}" for k, v in fields]
    return "\n".join(lines) + "\n"


def certificate_to_text(cert: ProofCertificate) -> str:
    sections = [
        ("certificate", [("verdict", cert.verdict), ("strategy", cert.strategy.value), ("negated", str(cert.negated).lower())]),
        ("problem", _problem_lines(cert.spec)),
    ]
    if cert.separator is not None:
        sections.append(("separator", _separator_lines(cert.separator)))
    if cert.separation is not None:
        sections.append(("separation", _separation_lines(cert.separation)))
    if cert.theorem_report is not None:
        sections.append(("theorem", _theorem_lines(cert.theorem_report)))
    if cert.split is not None:
        sections.append(("split", _split_lines(cert.split)))
        sections.append(("split.separator", _separator_lines(cert.split.separator)))
        if cert.split.separation is not None:
            sections.append(("split.separation", _separation_lines(cert.split.separation)))
    sections.append(("conclusion", _chain_lines(cert)))
    return _render(sections)


def _sections(text: str) -> dict[str, list[tuple[str, str]]]:
    out: dict[str, list[tuple[str, str]]] = {}
    current = None
    for num, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        if raw.startswith("[") and raw.endswith("]"):
            current = raw[1:-1]
            if current in out:
                raise CertificateFormatError(f"line {num}: duplicate section [{current}]")
            out[current] = []
            continue
        if current is None or " = " not in raw:
            raise CertificateFormatError(f"line {num}: expected 'key = value'")
        k, _, v = raw.partition(" = ")
        out[current].append((k, v))
    return out


class _Fields:
    def __init__(self, section: str, items: list[tuple[str, str]]):
        self.section = section
        self.items = items

    def get(self, key: str) -> str:
        vals = self.all(key)
        if len(vals) != 1:
            raise CertificateFormatError(f"[{self.section}] needs exactly one '{key}'")
        return vals[0]

    def all(self, key: str) -> list[str]:
        return [v for k, v in self.items if k == key]

    def optional(self, key: str, parse=str):
        v = self.get(key)
        return None if v == "none" else parse(v)


def _parse_problem(f: _Fields) -> ProblemSpec:
    return ProblemSpec(
        f.get("name"),
        int(f.get("n")),
        parse_expression(f.get("function")),
        parse_domain(f.get("domain")),
        parse_constraint(f.get("constraint")),
        Fraction(f.get("point")),
        Bound(f.get("direction")),
        Fraction(f.get("bound")),
    )


def _parse_separator(f: _Fields) -> Separator:
    s = Separator(parse_expression(f.get("l")), Fraction(f.get("k")), Fraction(f.get("m")), Fraction(f.get("x0")))
    if format_expression(s.g) != f.get("g"):
        raise CertificateFormatError("separator g does not match l, k and m")
    return s


def _parse_box(text: str) -> tuple[RatInterval, RatInterval]:
    a, sep, b = text.partition(" : ")
    if not sep:
        raise CertificateFormatError(f"bad box {text!r}")
    return _parse_iv(a), _parse_iv(b)


def _parse_separation(f: _Fields, s: Separator) -> SeparationProof:
    method = f.get("method")
    direction = Direction(f.get("direction"))
    domain = parse_domain(f.get("domain"))
    if method == "polynomial":
        backend = PolynomialCertificate(
            parse_polynomial(f.get("numerator")),
            parse_polynomial(f.get("denominator")),
            int(f.get("tau")),
            int(f.get("sigma")),
            parse_polynomial(f.get("quotient")),
            SignVerdict(SignKind(f.get("denominator_sign")), (), int(f.get("denominator_roots"))),
            SignVerdict(SignKind(f.get("quotient_sign")), (), int(f.get("quotient_roots"))),
        )
    elif method == "interval":
        backend = IntervalCertificate(
            int(f.get("sigma")),
            _parse_iv(f.get("hull")),
            _parse_iv(f.get("neighborhood")),
            tuple(_parse_box(v) for v in f.all("value_box")),
            tuple(_parse_box(v) for v in f.all("curvature_box")),
        )
    elif method == "identity":
        backend = IdentityCertificate()
    else:
        raise CertificateFormatError(f"unknown separation method {method!r}")
    return SeparationProof(direction, domain, s, backend)


def _parse_condition(text: str) -> Condition:
    parts = [p.strip() for p in text.split(" | ")]
    if len(parts) != 3 or parts[2] not in ("pass", "fail"):
        raise CertificateFormatError(f"bad condition {text!r}")
    return Condition(parts[0], Fraction(parts[1]), parts[2] == "pass")


def _parse_theorem(f: _Fields, separator, separation) -> TheoremReport:
    return TheoremReport(
        f.get("theorem"),
        tuple(_parse_condition(v) for v in f.all("condition")),
        f.optional("subdomain", parse_domain),
        separation,
        Verdict(f.get("verdict")),
        separator,
        f.optional("derivative", Fraction),
        f.optional("conclusion", Fraction),
    )


def certificate_from_text(text: str) -> ProofCertificate:
    """Parse a certificate document; no mathematical checks are made here."""
    secs = _sections(text)

    def sec(name) -> _Fields:
        if name not in secs:
            raise CertificateFormatError(f"missing section [{name}]")
        return _Fields(name, secs[name])

    allowed = {"certificate", "problem", "separator", "separation", "theorem", "split", "split.separator",
               "split.separation", "conclusion"}
    unknown = set(secs) - allowed
    if unknown:
        raise CertificateFormatError(f"unknown section(s): {', '.join(sorted(unknown))}")
    try:
        head = sec("certificate")
        if head.get("verdict") != "Proven":
            raise CertificateFormatError("certificate verdict must be Proven")
        strategy = Strategy(head.get("strategy"))
        negated = {"true": True, "false": False}[head.get("negated")]
        spec = _parse_problem(sec("problem"))
        separator = _parse_separator(sec("separator")) if "separator" in secs else None
        separation = None
        if "separation" in secs:
            if separator is None:
                raise CertificateFormatError("[separation] needs a [separator]")
            separation = _parse_separation(sec("separation"), separator)
        report = _parse_theorem(sec("theorem"), separator, separation) if "theorem" in secs else None
        split = None
        if "split" in secs:
            f = sec("split")
            ss = _parse_separator(sec("split.separator"))
            sproof = _parse_separation(sec("split.separation"), ss) if "split.separation" in secs else None
            split = DomainSplitCertificate(
                Fraction(f.get("t")),
                parse_real(f.get("upper")),
                ss,
                sproof,
                f.optional("lower_region", parse_domain),
                SignResult(Sign(f.get("nonnegativity"))),
                f.optional("monotone_region", parse_domain),
                MonotonicityResult(f.get("monotonicity")),
                _parse_value(f.get("endpoint_value")),
                Fraction(f.get("target")),
            )
        c = sec("conclusion")
        chain = ConclusionChain(
            Fraction(c.get("k")),
            Fraction(c.get("total")),
            int(c.get("n")),
            Fraction(c.get("m")),
            Fraction(c.get("value")),
            Fraction(c.get("bound")),
            c.get("relation"),
            c.get("source"),
            tuple(c.all("step")),
            spec.direction.symbol,
        )
        objective = c.optional("objective")
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, CertificateFormatError):
            raise
        raise CertificateFormatError(str(exc)) from None
    cert = ProofCertificate(spec, strategy, separator, separation, report, chain, negated, split, objective)
    if c.optional("objective_bound") != cert.objective_bound:
        raise CertificateFormatError("objective bound does not match the stated bound")
    return cert


def diagnosis_to_text(spec: ProblemSpec, d: Diagnosis) -> str:
    fields = [
        ("verdict", d.verdict),
        ("problem", spec.name),
        ("failed_strategy", d.failed_strategy.value),
    ]
    fields += [("failed_condition", f"{c.name} | {_q(c.value)}") for c in d.failed_conditions]
    fields += [("witness", _opt(d.witness, _q)), ("suggestion", d.suggestion_text)]
    fields += [("attempt", f"{a.strategy.value}: {a.summary}") for a in d.attempts]
    return _render([("diagnosis", fields)])


def diagnose_to_text(spec: ProblemSpec, ranking: list[CandidateReport]) -> str:
    fields = [("problem", spec.name)]
    for r in ranking:
        conds = "; ".join(f"{c.name} [{_q(c.value)}] {'pass' if c.passed else 'fail'}" for c in r.conditions)
        fields.append(("candidate", f"{r.label} | {r.strategy} | {r.score}" + (f" | {conds}" if conds else "")))
    return _render([("ranking", fields)])


__all__ = [
    "CertificateFormatError",
    "certificate_from_text",
    "certificate_to_text",
    "diagnose_to_text",
    "diagnosis_to_text",
    "Attempt",
    "CandidateReport",
    "ConclusionChain",
    "Diagnosis",
    "Hints",
    "Invalid",
    "ProofCertificate",
    "Strategy",
    "Suggestion",
    "Valid",
    "diagnose",
    "prove",
    "strategy_from_name",
    "verify_certificate",
]
