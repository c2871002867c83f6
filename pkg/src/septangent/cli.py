"""Problem files, the ``septangent`` command line, and the shipped corpus.

A problem file is line oriented: ``key value`` per line, ``#`` starts a
comment line. Keys (each at most once)::

    name            identifier
    vars            variable names, e.g. "a b c"; their count is n
    domain          "(0, 4)", "[0, +inf)", "(0, 2*sqrt(3))", "R"
    function        f in the expression grammar
    constraint      "sum = T", "sum_pow ALPHA = T", "product = T", "sum_l EXPR = T"
    point           x0
    direction       SumAtLeast | SumAtMost (or >= | <=)
    bound           claimed bound for sum f
    objective       optional "sum" or "-sum" (how the quantity of interest relates to sum f)
    hint_strategy   direct | theorem1 | theorem2 | theorem3 | split
    hint_separator  l for the separator
    hint_split      split threshold t
    budget          bisection depth
    expect_*        expectations checked by the corpus runner
    note            free text
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .calculus import DEFAULT_BUDGET
from .expr import (
    DomainInterval,
    ExpressionError,
    evaluate_point,
    parse_domain,
    parse_expression,
    real_lower,
    real_upper,
    try_exact,
)
from .numeric import NumericError, format_rational
from .poly import parse_polynomial
from .prover import (
    CertificateFormatError,
    Hints,
    ProofCertificate,
    certificate_from_text,
    certificate_to_text,
    diagnose,
    diagnose_to_text,
    diagnosis_to_text,
    prove,
    strategy_from_name,
    verify_certificate,
)
from .tangent import build_separator
from .theorems import (
    Bound,
    Counterexample,
    InconsistentSpec,
    ProblemSpec,
    jensen_sample_check,
    parse_constraint,
)

CORPUS_DIR = Path(__file__).with_name("corpus")

SPEC_KEYS = ("name", "vars", "domain", "function", "constraint", "point", "direction", "bound")
HINT_KEYS = ("objective", "hint_strategy", "hint_separator", "hint_split", "budget")
EXPECT_KEYS = (
    "expect_verdict",
    "expect_strategy",
    "expect_k",
    "expect_m",
    "expect_quotient",
    "expect_conclusion",
    "expect_suggestion",
    "expect_failed_condition",
    "expect_objective_bound",
)
KEYS = SPEC_KEYS + HINT_KEYS + EXPECT_KEYS + ("note",)
REQUIRED = SPEC_KEYS


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


@dataclass(frozen=True)
class ProblemFile:
    spec: ProblemSpec
    hints: Hints
    fields: dict = field(compare=False, default_factory=dict)

    @property
    def expectations(self) -> dict[str, str]:
        return {k: v for k, v in self.fields.items() if k.startswith("expect_")}

    def to_text(self) -> str:
        return emit_fields(self.fields)


def emit_fields(fields: dict[str, str]) -> str:
    return "".join(f"{k} {fields[k]}\n" for k in KEYS if k in fields)


def _direction(text: str) -> Bound:
    t = text.strip()
    if t in (">=", Bound.AT_LEAST.value):
        return Bound.AT_LEAST
    if t in ("<=", Bound.AT_MOST.value):
        return Bound.AT_MOST
    raise ValueError(f"unknown direction {text!r}")


def parse_problem(text: str) -> ProblemFile:
    fields: dict[str, str] = {}
    lines: dict[str, int] = {}
    for num, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(" ")
        value = value.strip()
        if key not in KEYS:
            raise ParseError(num, f"unknown key {key!r}")
        if key in fields:
            raise ParseError(num, f"duplicate key {key!r}")
        if not value:
            raise ParseError(num, f"missing value for {key!r}")
        fields[key] = value
        lines[key] = num
    last = len(text.splitlines())
    for key in REQUIRED:
        if key not in fields:
            raise ParseError(last, f"missing required key {key!r}")

    def conv(key, fn):
        try:
            return fn(fields[key])
        except InconsistentSpec:
            raise
        except (ValueError, ZeroDivisionError, ExpressionError) as exc:
            raise ParseError(lines[key], f"bad {key}: {exc}") from None

    names = fields["vars"].replace(",", " ").split()
    spec = ProblemSpec(
        fields["name"],
        len(names),
        conv("function", parse_expression),
        conv("domain", parse_domain),
        conv("constraint", parse_constraint),
        conv("point", Fraction),
        conv("direction", _direction),
        conv("bound", Fraction),
    )
    objective = fields.get("objective")
    if objective is not None and objective not in ("sum", "-sum"):
        raise ParseError(lines["objective"], "objective must be 'sum' or '-sum'")
    hints = Hints(
        strategy=conv("hint_strategy", strategy_from_name) if "hint_strategy" in fields else None,
        separator=conv("hint_separator", parse_expression) if "hint_separator" in fields else None,
        split=conv("hint_split", Fraction) if "hint_split" in fields else None,
        budget=conv("budget", int) if "budget" in fields else DEFAULT_BUDGET,
        objective=objective,
    )
    spec.validate()
    return ProblemFile(spec, hints, fields)


def load_problem(path) -> ProblemFile:
    return parse_problem(Path(path).read_text(encoding="utf-8"))


# -- commands ----------------------------------------------------------------


def _hints_with_flags(pf: ProblemFile, args) -> Hints:
    h = pf.hints
    if getattr(args, "budget", None) is not None:
        h = Hints(h.strategy, h.separator, h.split, args.budget, h.objective)
    if getattr(args, "strategy", None):
        h = Hints(strategy_from_name(args.strategy), h.separator, h.split, h.budget, h.objective)
    return h


def result_text(pf: ProblemFile, result) -> str:
    if isinstance(result, ProofCertificate):
        return certificate_to_text(result)
    return diagnosis_to_text(pf.spec, result)


def cmd_prove(args, out) -> int:
    pf = load_problem(args.path)
    result = prove(pf.spec, _hints_with_flags(pf, args))
    out.write(result_text(pf, result))
    return 0 if isinstance(result, ProofCertificate) else 1


def cmd_verify(args, out) -> int:
    cert = certificate_from_text(Path(args.path).read_text(encoding="utf-8"))
    verdict = verify_certificate(cert)
    out.write("Valid\n" if verdict.ok else f"Invalid: {verdict.reason}\n")
    return 0 if verdict.ok else 1


def cmd_diagnose(args, out) -> int:
    pf = load_problem(args.path)
    out.write(diagnose_to_text(pf.spec, diagnose(pf.spec)))
    return 0


def plot_points(d: DomainInterval, samples: int, x0: Fraction) -> list[Fraction]:
    """Equally spaced rational sample points across the domain.

    With both ends open the points are lo + i*w/(N+1), i = 1..N; otherwise
    the grid lo + i*w/(N-1) includes the ends, an open end moved inward by
    w/1000. Unbounded ends are replaced by x0 -/+ 10 (or the finite end +/- 10).
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    eps = Fraction(1, 10**9)
    lo = real_upper(d.lower, eps) if d.lower is not None else None
    hi = real_lower(d.upper, eps) if d.upper is not None else None
    lo_open, hi_open = d.lower_open or lo is None, d.upper_open or hi is None
    if lo is None:
        lo = (hi if hi is not None and hi < x0 else x0) - 10
    if hi is None:
        hi = (lo if lo > x0 else x0) + 10
    w = hi - lo
    if lo_open and hi_open:
        return [lo + w * i / (samples + 1) for i in range(1, samples + 1)]
    pts = [lo + w * i / (samples - 1) for i in range(samples)]
    if lo_open:
        pts[0] = lo + w / 1000
    if hi_open:
        pts[-1] = hi - w / 1000
    return pts


def _num(v) -> str:
    return f"{float(v):.12g}"


def cmd_plot(args, out) -> int:
    pf = load_problem(args.path)
    spec = pf.spec
    result = prove(spec, _hints_with_flags(pf, args))
    if isinstance(result, ProofCertificate) and result.separator is not None:
        s = result.separator
    else:
        s = build_separator(spec.f, pf.hints.separator or spec.constraint.l, spec.x0)
    eps = Fraction(args.eps) if args.eps else Fraction(1, 10**15)
    lines = ["x,f,g"]
    for x in plot_points(spec.domain, args.samples, spec.x0):
        row = [_num(x)]
        for e in (spec.f, s.g):
            v = try_exact(e, x)
            row.append(_num(v if v is not None else evaluate_point(e, x, eps).midpoint))
        lines.append(",".join(row))
    out.write("\n".join(lines) + "\n")
    return 0


@dataclass(frozen=True)
class CorpusRow:
    name: str
    expected: str
    actual: str
    ok: bool
    seconds: float
    detail: str = ""


def _same_polynomial_up_to_positive_scale(a_text: str, b) -> bool:
    a = parse_polynomial(a_text)
    if a.is_zero or b.is_zero:
        return a.is_zero and b.is_zero
    r = b.leading / a.leading
    return r > 0 and a.scale(r) == b


def check_expectations(pf: ProblemFile, result) -> list[str]:
    """Mismatch messages between a problem's expect_* keys and the prover result."""
    exp = pf.expectations
    bad = []
    proven = isinstance(result, ProofCertificate)
    actual = "Proven" if proven else "Diagnosis"
    if exp.get("expect_verdict", actual) != actual:
        bad.append(f"verdict {actual}")
    if proven:
        if "expect_strategy" in exp and exp["expect_strategy"] != result.strategy.value:
            bad.append(f"strategy {result.strategy.value}")
        s = result.separator
        for key, value in (("expect_k", s.k if s else None), ("expect_m", s.m if s else None)):
            if key in exp and (value is None or Fraction(exp[key]) != value):
                bad.append(f"{key[7:]} {value}")
        if "expect_quotient" in exp:
            sep = result.separation or (result.split.separation if result.split else None)
            q = getattr(sep.backend, "quotient", None) if sep is not None else None
            if q is None or not _same_polynomial_up_to_positive_scale(exp["expect_quotient"], q):
                bad.append(f"quotient {q.to_factored_text() if q is not None else None}")
        if "expect_conclusion" in exp and Fraction(exp["expect_conclusion"]) != result.chain.value:
            bad.append(f"conclusion {format_rational(result.chain.value)}")
        if "expect_objective_bound" in exp and exp["expect_objective_bound"] != result.objective_bound:
            bad.append(f"objective {result.objective_bound}")
        v = verify_certificate(result)
        if not v.ok:
            bad.append(f"certificate rejected: {v.reason}")
    else:
        if "expect_suggestion" in exp and exp["expect_suggestion"] != result.suggestion_text:
            bad.append(f"suggestion {result.suggestion_text}")
        if "expect_failed_condition" in exp:
            got = [f"{c.name} | {format_rational(c.value)}" for c in result.failed_conditions]
            if exp["expect_failed_condition"] not in got:
                bad.append(f"failed conditions {got}")
    return bad


def run_corpus(directory) -> list[CorpusRow]:
    rows = []
    for path in sorted(Path(directory).glob("*.ineq")):
        t0 = time.perf_counter()
        try:
            pf = load_problem(path)
            result = prove(pf.spec, pf.hints)
            actual = "Proven" if isinstance(result, ProofCertificate) else "Diagnosis"
            bad = check_expectations(pf, result)
            expected = pf.expectations.get("expect_verdict", "?")
            row = CorpusRow(path.stem, expected, actual, not bad, 0.0, "; ".join(bad))
        except (ParseError, InconsistentSpec, ValueError, ExpressionError, NumericError, OSError) as exc:
            row = CorpusRow(path.stem, "?", "error", False, 0.0, str(exc))
        rows.append(CorpusRow(row.name, row.expected, row.actual, row.ok, time.perf_counter() - t0, row.detail))
    return rows


def format_corpus(rows: list[CorpusRow], timings: bool = False) -> str:
    header = ["name", "expected", "actual", "status"] + (["seconds"] if timings else [])
    table = [header]
    for r in rows:
        line = [r.name, r.expected, r.actual, "ok" if r.ok else f"MISMATCH ({r.detail})"]
        if timings:
            line.append(f"{r.seconds:.3f}")
        table.append(line)
    passed = sum(r.ok for r in rows)
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    out = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table]
    out.append(f"{passed}/{len(rows)} match")
    return "\n".join(out) + "\n"


def cmd_corpus(args, out) -> int:
    rows = run_corpus(args.directory or CORPUS_DIR)
    out.write(format_corpus(rows, args.timings))
    return 0 if all(r.ok for r in rows) else 1


def cmd_falsify(args, out) -> int:
    pf = load_problem(args.path)
    res = jensen_sample_check(pf.spec, args.trials, args.seed)
    if isinstance(res, Counterexample):
        pt = ", ".join(format_rational(v) for v in res.point)
        lhs = format_rational(res.lhs) if isinstance(res.lhs, Fraction) else str(res.lhs)
        out.write(f"Counterexample\npoint = ({pt})\nlhs = {lhs}\nrhs = {format_rational(res.rhs)}\n")
        return 1
    out.write(f"NoCounterexample\ntrials = {res.trials}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="septangent", description="Separating-curve proofs of symmetric inequalities.")
    sub = p.add_subparsers(dest="command", required=True)

    def problem_cmd(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("path")
        sp.add_argument("--budget", type=int, default=None, help="bisection depth")
        sp.add_argument("--strategy", default=None, help="force a strategy first")
        sp.add_argument("--eps", default=None, help="enclosure width P/Q")
        sp.set_defaults(func=fn)
        return sp

    problem_cmd("prove", cmd_prove, "prove a problem file and print the certificate")
    problem_cmd("diagnose", cmd_diagnose, "rank separator families without proving")
    plot = problem_cmd("plot", cmd_plot, "CSV samples of f and g")
    plot.add_argument("--samples", type=int, default=50)
    fal = problem_cmd("falsify", cmd_falsify, "seeded random search for a counterexample")
    fal.add_argument("--trials", type=int, default=10**5)
    fal.add_argument("--seed", type=int, default=42)
    ver = sub.add_parser("verify", help="re-check a certificate document")
    ver.add_argument("path")
    ver.set_defaults(func=cmd_verify)
    cor = sub.add_parser("corpus", help="run a directory of problem files against their expectations")
    cor.add_argument("directory", nargs="?", default=None)
    cor.add_argument("--timings", action="store_true")
    cor.set_defaults(func=cmd_corpus)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (OSError, ParseError, InconsistentSpec, CertificateFormatError, ValueError, ExpressionError, NumericError) as exc:
        print(f"septangent: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
