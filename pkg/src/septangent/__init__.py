"""Separating-curve proofs of constrained symmetric inequalities.

Given f, a constraint sum l(x_j) = T and an equality point x0, the curve
g = k*l + m tangent to f at x0 turns a pointwise bound f >= g (or f <= g)
into a bound on sum f(x_j). The package builds g exactly, certifies the
pointwise bound with exact polynomial algebra or rigorous interval
arithmetic, and writes checkable certificates.
"""

from .calculus import Sign, differentiate, expression_sign, second_derivative_sign
from .expr import DomainInterval, X, format_expression, parse_domain, parse_expression
from .numeric import RatInterval
from .poly import Polynomial, count_roots, deflate_double_root, sign_on_interval
from .prover import (
    Diagnosis,
    Hints,
    ProofCertificate,
    Strategy,
    certificate_from_text,
    certificate_to_text,
    diagnose,
    prove,
    verify_certificate,
)
from .tangent import Direction, Separator, build_separator, tangent_line, verify_separation
from .theorems import (
    Bound,
    GeneralL,
    PowerSum,
    ProblemSpec,
    Product,
    Sum,
    check_theorem1,
    check_theorem2,
    check_theorem3,
    domain_split_prove,
    jensen_sample_check,
    power_mean,
)

__version__ = "0.1.0"

__all__ = [
    "Bound",
    "Diagnosis",
    "Direction",
    "DomainInterval",
    "GeneralL",
    "Hints",
    "Polynomial",
    "PowerSum",
    "ProblemSpec",
    "Product",
    "ProofCertificate",
    "RatInterval",
    "Separator",
    "Sign",
    "Strategy",
    "Sum",
    "X",
    "build_separator",
    "certificate_from_text",
    "certificate_to_text",
    "check_theorem1",
    "check_theorem2",
    "check_theorem3",
    "count_roots",
    "deflate_double_root",
    "diagnose",
    "differentiate",
    "domain_split_prove",
    "expression_sign",
    "format_expression",
    "jensen_sample_check",
    "parse_domain",
    "parse_expression",
    "power_mean",
    "prove",
    "second_derivative_sign",
    "sign_on_interval",
    "tangent_line",
    "verify_certificate",
    "verify_separation",
]
