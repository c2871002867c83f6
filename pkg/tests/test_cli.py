import io
import shutil
from fractions import Fraction as F

import pytest

from septangent.cli import (
    CORPUS_DIR,
    ParseError,
    load_problem,
    main,
    parse_problem,
    plot_points,
)
from septangent.expr import DomainInterval, evaluate_point, parse_domain, parse_expression
from septangent.theorems import GeneralL, InconsistentSpec, Sum

BALTIC = CORPUS_DIR / "baltic2011.ineq"


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out)
    return code, out.getvalue()


class TestLoad:
    def test_baltic(self):
        pf = load_problem(BALTIC)
        s = pf.spec
        assert (s.n, s.x0, s.bound, s.constraint) == (4, 1, F(4, 9), Sum(4))
        assert s.f == parse_expression("x/(x^3+8)")

    def test_example2_general_constraint(self):
        pf = load_problem(CORPUS_DIR / "example2.ineq")
        assert pf.spec.constraint == GeneralL(parse_expression("1/(4+x)"), 1)

    def test_inconsistent(self):
        text = BALTIC.read_text().replace("point 1", "point 2")
        with pytest.raises(InconsistentSpec):
            parse_problem(text)

    def test_unknown_key(self):
        with pytest.raises(ParseError) as info:
            parse_problem(BALTIC.read_text() + "bonud 4/9\n")
        assert info.value.line == len(BALTIC.read_text().splitlines()) + 1

    def test_duplicate_and_missing(self):
        with pytest.raises(ParseError):
            parse_problem(BALTIC.read_text() + "bound 1\n")
        with pytest.raises(ParseError):
            parse_problem("name x\n")

    def test_bad_value_reports_line(self):
        text = BALTIC.read_text().replace("function x/(x^3 + 8)", "function x/(x^3 + )")
        with pytest.raises(ParseError) as info:
            parse_problem(text)
        assert info.value.line == 4

    @pytest.mark.parametrize("path", sorted(CORPUS_DIR.glob("*.ineq")), ids=lambda p: p.stem)
    def test_round_trip(self, path):
        pf = load_problem(path)
        again = parse_problem(pf.to_text())
        assert again.spec == pf.spec and again.hints == pf.hints
        assert again.to_text() == pf.to_text()


class TestExitCodes:
    def test_prove_proven(self):
        code, out = run("prove", BALTIC)
        assert code == 0 and "4/9" in out

    def test_prove_diagnosis(self):
        code, out = run("prove", CORPUS_DIR / "baltic2005.ineq")
        assert code == 1 and "f'(x0) >= 0" in out and "TryLogSeparator" in out

    def test_missing_file(self, tmp_path, capsys):
        code, out = run("prove", tmp_path / "missing.ineq")
        assert code == 2 and out == ""
        assert "error" in capsys.readouterr().err

    def test_verify(self, tmp_path):
        _, cert = run("prove", BALTIC)
        good = tmp_path / "c.txt"
        good.write_text(cert)
        assert run("verify", good) == (0, "Valid\n")
        bad = tmp_path / "bad.txt"
        lines = [ln.replace("+ 8)", "+ 7)") if ln.startswith("quotient =") else ln for ln in cert.split("\n")]
        bad.write_text("\n".join(lines))
        code, out = run("verify", bad)
        assert code == 1 and out.startswith("Invalid: reconstruction mismatch")

    def test_falsify(self, tmp_path):
        code, out = run("falsify", BALTIC, "--trials", 1000)
        assert code == 0 and out == "NoCounterexample\ntrials = 1000\n"
        tight = tmp_path / "tight.ineq"
        tight.write_text(BALTIC.read_text().replace("bound 4/9", "bound 43/100"))
        code, out = run("falsify", tight, "--trials", 1000)
        assert code == 1 and "point = (1, 1, 1, 1)" in out

    def test_diagnose(self):
        code, out = run("diagnose", CORPUS_DIR / "example1.ineq")
        assert code == 0 and out


class TestPlot:
    def test_baltic_three_samples(self):
        code, out = run("plot", BALTIC, "--samples", 3)
        lines = out.splitlines()
        assert code == 0 and lines[0] == "x,f,g" and out.endswith("\n") and "\r" not in out
        rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
        assert [r[0] for r in rows] == [1, 2, 3]
        assert rows[0][1] == rows[0][2] == float(f"{1 / 9:.12g}")
        for x, f, g in rows:
            assert f == pytest.approx(x / (x**3 + 8), rel=1e-11)
            assert g == pytest.approx((2 * x + 1) / 27, rel=1e-11)
            assert f <= g

    def test_two_samples_clip_open_ends(self):
        assert plot_points(parse_domain("(0, 4)"), 2, F(1)) == [F(4, 3), F(8, 3)]
        assert plot_points(parse_domain("(0, 4]"), 2, F(1)) == [F(4, 1000), F(4)]
        assert plot_points(DomainInterval.closed(0, 4), 2, F(1)) == [F(0), F(4)]
        with pytest.raises(ValueError):
            plot_points(DomainInterval.closed(0, 4), 1, F(1))

    def test_example4_uses_enclosure_midpoint(self):
        code, out = run("plot", CORPUS_DIR / "example4.ineq", "--samples", 5)
        assert code == 0
        f = parse_expression("-x*(12 - x^2)^(1/3)")
        for line in out.splitlines()[1:]:
            x, fx, gx = (float(v) for v in line.split(","))
            xr = F(x)
            mid = evaluate_point(f, xr, F(1, 10**15)).midpoint
            assert fx == pytest.approx(float(mid), rel=1e-10)
            assert gx == pytest.approx(-(4 * x + 4) / 3, rel=1e-10)

    def test_samples_below_two_is_an_error(self):
        assert run("plot", BALTIC, "--samples", 1)[0] == 2


class TestCorpus:
    def test_shipped_corpus(self):
        code, out = run("corpus")
        assert code == 0
        assert out.splitlines()[-1] == "13/13 match"
        assert "MISMATCH" not in out

    def test_empty_directory(self, tmp_path):
        assert run("corpus", tmp_path) == (0, "name  expected  actual  status\n0/0 match\n")

    def test_tampered_expectation(self, tmp_path):
        shutil.copy(BALTIC, tmp_path)
        (tmp_path / "baltic2011.ineq").write_text(
            BALTIC.read_text().replace("expect_verdict Proven", "expect_verdict Diagnosis")
        )
        code, out = run("corpus", tmp_path)
        assert code == 1 and "MISMATCH" in out

    def test_tampered_intermediate(self, tmp_path):
        (tmp_path / "b.ineq").write_text(BALTIC.read_text().replace("expect_k 2/27", "expect_k 1/27"))
        code, out = run("corpus", tmp_path)
        assert code == 1 and "k 2/27" in out

    def test_bad_file_counts_as_mismatch(self, tmp_path):
        (tmp_path / "a.ineq").write_text("nonsense here\n")
        code, out = run("corpus", tmp_path)
        assert code == 1 and "error" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("prove", BALTIC),
        ("prove", CORPUS_DIR / "example4.ineq"),
        ("diagnose", CORPUS_DIR / "baltic2005.ineq"),
        ("plot", CORPUS_DIR / "example3.ineq"),
        ("falsify", CORPUS_DIR / "remark3.ineq", "--trials", 2000, "--seed", 7),
        ("corpus",),
    ],
    ids=lambda a: a[0],
)
def test_deterministic_output(argv):
    assert run(*argv) == run(*argv)
