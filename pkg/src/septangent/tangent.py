"""Separating curves g = k*l + m and certified separation of f from g."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .calculus import (
    DEFAULT_BUDGET,
    RationalFunction,
    bisect_sign,
    differentiate,
    try_rational_function,
)
from .expr import (
    Add,
    Const,
    DomainInterval,
    DomainViolation,
    Expr,
    IrrationalValue,
    Mul,
    Neg,
    Sub,
    X,
    evaluate_exact,
    evaluate_point,
    to_float_function,
    try_exact,
)
from .numeric import NumericError, RatInterval, format_rational, rational
from .poly import (
    Polynomial,
    SignVerdict,
    count_roots,
    deflate_double_root,
    sign_on_interval,
)


class DegenerateSeparator(ValueError):
    pass


class SeparationFails(Exception):
    """The inequality is violated at a rational witness point."""

    def __init__(self, witness: Fraction, value, message: str = ""):
        v = format_rational(value) if isinstance(value, Fraction) else str(value)
        super().__init__(message or f"separation fails at x = {format_rational(witness)} (f - g = {v})")
        self.witness = witness
        self.value = value


class SeparationInconclusive(Exception):
    def __init__(self, reason: str, gaps=()):
        super().__init__(reason)
        self.reason = reason
        self.gaps = tuple(gaps)


class Direction(Enum):
    F_ABOVE_G = "FAboveG"  # f >= g
    F_BELOW_G = "FBelowG"  # f <= g

    @property
    def sign(self) -> int:
        return 1 if self is Direction.F_ABOVE_G else -1

    def flipped(self) -> "Direction":
        return Direction.F_BELOW_G if self is Direction.F_ABOVE_G else Direction.F_ABOVE_G


@dataclass(frozen=True)
class Separator:
    l: Expr
    k: Fraction
    m: Fraction
    x0: Fraction

    @property
    def g(self) -> Expr:
        k, m = self.k, self.m
        if k == 0:
            return Const(m)
        term = self.l if abs(k) == 1 else Mul(Const(abs(k)), self.l)
        if k < 0:
            term = Neg(term)
        if m > 0:
            return Add(term, Const(m))
        if m < 0:
            return Sub(term, Const(-m))
        return term

    def negated(self) -> "Separator":
        return Separator(self.l, -self.k, -self.m, self.x0)


def separator_coefficients(f: Expr, l: Expr, x0) -> tuple[Fraction, Fraction]:
    """k = f'(x0)/l'(x0) and m = f(x0) - k*l(x0), exactly."""
    x0 = rational(x0)
    dl = evaluate_exact(differentiate(l), x0)
    if dl == 0:
        raise DegenerateSeparator(f"l'(x0) = 0 at x0 = {format_rational(x0)}")
    df = evaluate_exact(differentiate(f), x0)
    k = df / dl
    m = evaluate_exact(f, x0) - k * evaluate_exact(l, x0)
    return k, m


def separator_enclosure(f: Expr, l: Expr, x0, eps=Fraction(1, 10**12)) -> tuple[RatInterval, RatInterval]:
    """Tight enclosures of k and m when the exact values are irrational."""
    x0 = rational(x0)
    dl = evaluate_point(differentiate(l), x0, eps)
    if dl.is_point and dl.lo == 0:
        raise DegenerateSeparator(f"l'(x0) = 0 at x0 = {format_rational(x0)}")
    if dl.contains_zero():
        raise DegenerateSeparator("l'(x0) cannot be separated from zero")
    k = evaluate_point(differentiate(f), x0, eps) / dl
    m = evaluate_point(f, x0, eps) - k * evaluate_point(l, x0, eps)
    return k, m


def build_separator(f: Expr, l: Expr, x0) -> Separator:
    k, m = separator_coefficients(f, l, x0)
    return Separator(l, k, m, rational(x0))


def tangent_line(f: Expr, x0) -> Separator:
    return build_separator(f, X, x0)


# -- certificates ------------------------------------------------------------


@dataclass(frozen=True)
class PolynomialCertificate:
    """h = f - g = P/Q with Q monic; P = sigma * tau * (x - x0)^2 * quotient.

    ``tau`` is the certified constant sign of Q on the domain and ``sigma`` the
    direction sign, so quotient >= 0 on the domain proves the claim.
    """

    numerator: Polynomial
    denominator: Polynomial
    tau: int
    sigma: int
    quotient: Polynomial
    denominator_sign: SignVerdict
    quotient_sign: SignVerdict


@dataclass(frozen=True)
class IntervalCertificate:
    """Bisection evidence for sigma * h >= 0 on ``hull``.

    ``boxes`` pairs each box with an enclosure of sigma*h that is >= 0;
    ``curvature`` pairs boxes covering ``neighborhood`` with enclosures of
    sigma*h'' that are >= 0, which with h(x0) = h'(x0) = 0 gives the claim there.
    """

    sigma: int
    hull: RatInterval
    neighborhood: RatInterval
    boxes: tuple[tuple[RatInterval, RatInterval], ...]
    curvature: tuple[tuple[RatInterval, RatInterval], ...]


@dataclass(frozen=True)
class IdentityCertificate:
    """f and g coincide identically (k = 1, m = 0, l = f)."""


@dataclass(frozen=True)
class SeparationProof:
    direction: Direction
    domain: DomainInterval
    separator: Separator
    backend: object

    @property
    def method(self) -> str:
        if isinstance(self.backend, PolynomialCertificate):
            return "polynomial"
        if isinstance(self.backend, IntervalCertificate):
            return "interval"
        return "identity"


def difference(f: Expr, s: Separator) -> Expr:
    return Sub(f, s.g)


def _poly_route(f: Expr, s: Separator, d: DomainInterval, direction: Direction, rf: RationalFunction) -> SeparationProof:
    p, q = rf.numerator, rf.denominator
    if q.degree > 0 and count_roots(q, d) > 0:
        raise SeparationInconclusive("denominator of f - g vanishes on the domain")
    qv = sign_on_interval(q, d)
    tau = 1 if qv.nonnegative else -1
    sigma = direction.sign
    raw = deflate_double_root(p, s.x0)
    quotient = raw.scale(sigma * tau)
    verdict = sign_on_interval(quotient, d)
    if not verdict.nonnegative:
        w, v = _worst_point(rf, d, sigma, verdict)
        raise SeparationFails(w, v)
    cert = PolynomialCertificate(p, q, tau, sigma, quotient, qv, verdict)
    return SeparationProof(direction, d, s, cert)


def _worst_point(rf: RationalFunction, d: DomainInterval, sigma: int, verdict: SignVerdict):
    """Grid point (closed endpoints included) where sigma*h is smallest; it is negative."""
    candidates = list(d.probe_points(3)) + [x for x, _ in verdict.witnesses]
    best = None
    for x in candidates:
        if rf.denominator(x) == 0:
            continue
        v = sigma * rf(x)
        if best is None or v < best[1]:
            best = (x, v)
    if best is None or best[1] >= 0:
        raise SeparationInconclusive("quotient changes sign but no violating sample was found")
    return best[0], best[1] * sigma


def verify_separation(
    f: Expr,
    s: Separator,
    d: DomainInterval,
    direction: Direction,
    budget: int = DEFAULT_BUDGET,
    eps=Fraction(1, 1 << 60),
) -> SeparationProof:
    """Certify f >= g (F_ABOVE_G) or f <= g (F_BELOW_G) on d.

    Raises :class:`SeparationFails` with a rational witness when the claim is
    false and :class:`SeparationInconclusive` when the budget runs out.
    """
    if s.k == 1 and s.m == 0 and s.l == f:
        return SeparationProof(direction, d, s, IdentityCertificate())
    h = difference(f, s)
    rf = try_rational_function(h)
    if rf is not None:
        return _poly_route(f, s, d, direction, rf)
    return _interval_route(h, s, d, direction, budget, eps)


def _probe_violation(h: Expr, d: DomainInterval, sigma: int):
    pts = d.probe_points(3)
    if not pts:
        return None
    fn = to_float_function(h)
    vals = sigma * fn(np.array([float(x) for x in pts]))
    order = np.argsort(vals)
    for i in order[:20]:
        if not np.isfinite(vals[i]) or vals[i] >= 0:
            break
        x = pts[int(i)]
        try:
            v = evaluate_point(h, x)
        except (DomainViolation, NumericError, ArithmeticError):
            continue
        if (sigma > 0 and v.hi < 0) or (sigma < 0 and v.lo > 0):
            exact = try_exact(h, x)
            return x, exact if exact is not None else v
    return None


def _interval_route(h: Expr, s: Separator, d: DomainInterval, direction: Direction, budget: int, eps) -> SeparationProof:
    sigma = direction.sign
    bad = _probe_violation(h, d, sigma)
    if bad:
        raise SeparationFails(*bad)
    if not d.bounded:
        raise SeparationInconclusive("interval backend needs a bounded domain")
    try:
        h0 = evaluate_exact(h, s.x0)
        dh0 = evaluate_exact(differentiate(h), s.x0)
    except IrrationalValue:
        raise SeparationInconclusive("tangency at x0 could not be confirmed exactly") from None
    if h0 != 0 or dh0 != 0:
        raise SeparationInconclusive("h(x0) and h'(x0) do not both vanish")
    hull = d.closure_hull()
    if not hull.contains(s.x0):
        raise SeparationInconclusive("x0 lies outside the domain")
    sh = h if sigma > 0 else -h
    d2 = differentiate(differentiate(sh))
    radius = hull.width / 4
    neighborhood = None
    curvature = ()
    for _ in range(budget):
        n = RatInterval(max(hull.lo, s.x0 - radius), min(hull.hi, s.x0 + radius))
        ok, boxes, _, _ = bisect_sign(d2, n, 1, budget=12, eps=eps, max_boxes=2000)
        if ok:
            neighborhood, curvature = n, tuple(boxes)
            break
        radius /= 2
    if neighborhood is None:
        raise SeparationInconclusive("no neighborhood of x0 with certified curvature")
    pieces = []
    if hull.lo < neighborhood.lo:
        pieces.append(RatInterval(hull.lo, neighborhood.lo))
    if neighborhood.hi < hull.hi:
        pieces.append(RatInterval(neighborhood.hi, hull.hi))
    covered: list[tuple[RatInterval, RatInterval]] = []
    gaps: list[RatInterval] = []
    for piece in pieces:
        ok, boxes, g, refuting = bisect_sign(sh, piece, 1, budget=budget, eps=eps)
        if refuting is not None:
            x = refuting.midpoint
            raise SeparationFails(x, evaluate_point(h, x))
        covered.extend(boxes)
        gaps.extend(g)
    if gaps:
        raise SeparationInconclusive("bisection budget exhausted", gaps)
    cert = IntervalCertificate(sigma, hull, neighborhood, tuple(covered), curvature)
    return SeparationProof(direction, d, s, cert)


def check_tangency(f: Expr, s: Separator) -> bool:
    """g(x0) = f(x0) and g'(x0) = f'(x0), exactly or within 1e-9 enclosures."""
    h = difference(f, s)
    eps = Fraction(1, 10**10)
    for e in (h, differentiate(h)):
        v = evaluate_point(e, s.x0, eps)
        if not v.contains(0):
            return False
    return True


__all__ = [
    "DegenerateSeparator",
    "Direction",
    "IdentityCertificate",
    "IntervalCertificate",
    "PolynomialCertificate",
    "SeparationFails",
    "SeparationInconclusive",
    "SeparationProof",
    "Separator",
    "build_separator",
    "check_tangency",
    "difference",
    "separator_coefficients",
    "separator_enclosure",
    "tangent_line",
    "verify_separation",
]
