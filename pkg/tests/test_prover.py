import re
from fractions import Fraction as F

import pytest

from septangent.cli import CORPUS_DIR, load_problem
from septangent.expr import X, Ln, parse_expression
from septangent.poly import Polynomial
from septangent.prover import (
    CertificateFormatError,
    Diagnosis,
    Hints,
    Invalid,
    ProofCertificate,
    Strategy,
    Suggestion,
    Valid,
    certificate_from_text,
    certificate_to_text,
    diagnose,
    prove,
    verify_certificate,
)
from septangent.theorems import NoCounterexample, jensen_sample_check

CORPUS = sorted(p.stem for p in CORPUS_DIR.glob("*.ineq"))


def run(name):
    pf = load_problem(CORPUS_DIR / f"{name}.ineq")
    return pf, prove(pf.spec, pf.hints)


def edit_line(text: str, key: str, old: str, new: str, section: str | None = None) -> str:
    """Replace ``old`` by ``new`` on lines starting with ``key =`` (optionally in one section)."""
    out, current = [], None
    for line in text.split("\n"):
        if line.startswith("["):
            current = line.strip("[]")
        if line.startswith(f"{key} =") and (section is None or current == section):
            line = line.replace(old, new)
        out.append(line)
    edited = "\n".join(out)
    assert edited != text
    return edited


class TestProve:
    def test_baltic2011(self):
        _, cert = run("baltic2011")
        assert isinstance(cert, ProofCertificate)
        assert cert.strategy is Strategy.DIRECT
        assert (cert.separator.k, cert.separator.m) == (F(2, 27), F(1, 27))
        assert cert.separation.backend.quotient.primitive() == Polynomial.of(8, 5, 2)
        assert cert.chain.value == F(2 * 4 + 4, 27) == F(4, 9)
        assert cert.conclusion_chain == (
            "sum g = 2/27 * 4 + 4 * 1/27",
            "2/27 * 4 + 4 * 1/27 = 4/9",
            "4/9 <= 4/9",
        )

    def test_example3_split(self):
        _, cert = run("example3")
        assert cert.strategy is Strategy.DOMAIN_SPLIT and cert.split.t == F(9, 10)

    def test_example3_without_split_hint(self):
        pf = load_problem(CORPUS_DIR / "example3.ineq")
        d = prove(pf.spec, Hints())
        assert isinstance(d, Diagnosis)
        assert d.suggestion is Suggestion.TRY_DOMAIN_SPLIT
        assert d.witness is not None and F(9, 10) < d.witness <= 1

    def test_baltic2005_diagnosis(self):
        _, d = run("baltic2005")
        assert isinstance(d, Diagnosis)
        assert d.failed_strategy is Strategy.THEOREM1
        assert [(c.name, c.value) for c in d.failed_conditions] == [("f'(x0) >= 0", F(-1, 9))]
        assert d.suggestion is Suggestion.TRY_LOG_SEPARATOR
        assert len(d.attempts) >= 2

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_example5_theorem3(self, n):
        _, cert = run(f"example5_n{n}")
        assert cert.strategy is Strategy.THEOREM3
        assert cert.chain.value == cert.spec.bound == F((n - 1) ** 2, n**2)

    def test_example5_single_variable(self):
        _, cert = run("example5_n1")
        assert cert.strategy is Strategy.SINGLE_VARIABLE
        assert cert.conclusion_chain[-1] == "0 <= 0"

    def test_example4_objective(self):
        _, cert = run("example4")
        assert cert.strategy is Strategy.THEOREM1
        assert cert.objective_bound == "max A = 12"
        assert (cert.separator.k, cert.separator.m) == (F(-4, 3), F(-4, 3))

    def test_example1_falls_back_to_square_separator(self):
        _, cert = run("example1")
        assert cert.strategy is Strategy.DIRECT and cert.separator.l == X**2

    def test_hinted_theorem2(self):
        pf = load_problem(CORPUS_DIR / "baltic2011.ineq")
        cert = prove(pf.spec, Hints(strategy=Strategy.THEOREM2))
        assert cert.strategy is Strategy.THEOREM2
        assert verify_certificate(cert).ok

    def test_unreachable_bound_is_not_proven(self):
        pf = load_problem(CORPUS_DIR / "baltic2011.ineq")
        assert isinstance(prove(pf.spec.with_bound(F(4, 9) - F(1, 100)), pf.hints), Diagnosis)


class TestVerify:
    @pytest.mark.parametrize("name", CORPUS)
    def test_fresh_certificates_verify_and_round_trip(self, name):
        _, cert = run(name)
        if isinstance(cert, Diagnosis):
            return
        assert verify_certificate(cert) == Valid()
        text = certificate_to_text(cert)
        back = certificate_from_text(text)
        assert certificate_to_text(back) == text
        assert verify_certificate(back).ok

    def test_tampered_quotient(self):
        _, cert = run("baltic2011")
        text = edit_line(certificate_to_text(cert), "quotient", "+ 8)", "+ 7)")
        r = verify_certificate(certificate_from_text(text))
        assert isinstance(r, Invalid) and r.reason.startswith("reconstruction mismatch")

    def test_tampered_bound_in_conclusion(self):
        _, cert = run("baltic2011")
        text = edit_line(certificate_to_text(cert), "bound", "4/9", "5/9", section="conclusion")
        r = verify_certificate(certificate_from_text(text))
        assert isinstance(r, Invalid) and r.reason.startswith("conclusion arithmetic")

    def test_tampered_bound_everywhere(self):
        _, cert = run("baltic2011")
        text = certificate_to_text(cert)
        text = edit_line(text, "bound", "4/9", "5/9")
        r = verify_certificate(certificate_from_text(text))
        assert isinstance(r, Invalid) and r.reason.startswith("conclusion arithmetic")

    def test_tampered_coefficient(self):
        _, cert = run("baltic2011")
        text = edit_line(certificate_to_text(cert), "k", "2/27", "1/27", section="separator")
        with pytest.raises(CertificateFormatError):
            certificate_from_text(text)
        text = edit_line(text, "g", "2/27 * x", "1/27 * x", section="separator")
        assert not verify_certificate(certificate_from_text(text)).ok

    def test_tampered_interval_box(self):
        _, cert = run("example4")
        text = certificate_to_text(cert)
        lines = text.split("\n")
        i = next(j for j, line in enumerate(lines) if line.startswith("value_box ="))
        del lines[i]
        r = verify_certificate(certificate_from_text("\n".join(lines)))
        assert not r.ok

    def test_tampered_theorem_condition(self):
        _, cert = run("remark3")
        text = certificate_to_text(cert)
        edited = re.sub(r"(condition = 2\*a\*x0 \+ b >= 0 \| )1", r"\g<1>2", text)
        assert edited != text
        assert not verify_certificate(certificate_from_text(edited)).ok

    def test_format_errors(self):
        with pytest.raises(CertificateFormatError):
            certificate_from_text("[certificate]\nverdict = Proven\n")
        _, cert = run("baltic2011")
        with pytest.raises(CertificateFormatError):
            certificate_from_text(certificate_to_text(cert) + "[bogus]\nx = 1\n")


class TestDiagnose:
    def test_example1_ranks_square_first(self):
        pf = load_problem(CORPUS_DIR / "example1.ineq")
        ranking = diagnose(pf.spec)
        assert ranking[0].l == X**2
        t1 = next(r for r in ranking if r.l == X)
        # f'(1) = -1/3 and (2 - 1) * f'(1) <= 0 holds for the tangent line
        assert t1.conditions[0].value == F(-1, 3)

    def test_baltic2011_ranks_tangent_first(self):
        pf = load_problem(CORPUS_DIR / "baltic2011.ineq")
        assert diagnose(pf.spec)[0].l == X

    def test_baltic2005_ranks_tangent_last(self):
        pf = load_problem(CORPUS_DIR / "baltic2005.ineq")
        ranking = diagnose(pf.spec)
        assert ranking[-1].l == X and ranking[0].l == Ln(X)

    def test_example2_uses_constraint_family(self):
        pf = load_problem(CORPUS_DIR / "example2.ineq")
        assert diagnose(pf.spec)[0].l == parse_expression("1/(4 + x)")


@pytest.mark.parametrize("name", CORPUS)
def test_no_false_proofs(name):
    pf, cert = run(name)
    if not isinstance(cert, ProofCertificate):
        return
    assert jensen_sample_check(pf.spec, 10**5, 42) == NoCounterexample(10**5)
