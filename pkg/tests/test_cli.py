"""Tests for the command-line front end."""

import json
import math

import pytest

from totpos import families_for, family_grid
from totpos._cli import (
    EXIT_FAIL,
    EXIT_OK,
    EXIT_USAGE,
    UsageError,
    build_parser,
    main,
    parse_real,
)


def run(capsys, *argv):
    """Run the CLI and return (exit code, parsed stdout report)."""
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


class TestCheckCommands:
    """Tests for check, fekete and hankel."""

    def test_check_fail(self, capsys):
        """Test a failing strict check exits 1 with its witness."""
        code, doc = run(capsys, "check", "[[1, 2], [3, 4]]", "--strict")
        assert code == EXIT_FAIL
        assert doc["verdict"]["status"] == "FAIL"
        assert doc["verdict"]["witness"]["value"] == "-2"
        assert doc["kind"] == "exact"

    def test_check_file(self, capsys, tmp_path):
        """Test a JSON matrix file is read and checked."""
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"rows": [[1, 1, 1], [1, 2, 4], [1, 3, 9]]}))
        code, doc = run(capsys, "check", str(path), "--strict")
        assert code == EXIT_OK
        assert doc["verdict"]["status"] == "TP"

    def test_check_csv(self, capsys, tmp_path):
        """Test CSV input is read as floats."""
        path = tmp_path / "m.csv"
        path.write_text("1,0\n0,1\n")
        code, doc = run(capsys, "check", str(path))
        assert code == EXIT_OK
        assert doc["kind"] == "float"

    def test_out_file(self, capsys, tmp_path):
        """Test --out writes the report instead of printing it."""
        out = tmp_path / "report.json"
        code = main(["check", "[[2, 1], [1, 2]]", "--out", str(out)])
        assert code == EXIT_OK
        assert capsys.readouterr().out == ""
        assert json.loads(out.read_text())["verdict"]["status"] == "TN"

    def test_fekete(self, capsys):
        """Test the contiguous-minor certificate."""
        code, doc = run(capsys, "fekete", "[[1, 1], [1, 2]]")
        assert code == EXIT_OK
        assert doc["verdict"]["status"] == "TP"

    def test_hankel(self, capsys):
        """Test moments 1, 0, 1, 0, 1 fail with a negative 2x2 minor."""
        code, doc = run(capsys, "hankel", "1,0,1,0,1")
        assert code == EXIT_FAIL
        assert doc["verdict"]["witness"]["value"] == "-1"

    def test_missing_file(self, capsys, tmp_path):
        """Test an unreadable input is a usage error."""
        assert main(["check", str(tmp_path / "absent.json")]) == EXIT_USAGE
        assert "Cannot read" in capsys.readouterr().err

    def test_malformed_json(self, capsys):
        """Test malformed JSON reports its position."""
        assert main(["check", "[[1, 2"]) == EXIT_USAGE
        assert "<inline>:" in capsys.readouterr().err


class TestPreserverCommand:
    """Tests for the preserver subcommand."""

    def test_square_root(self, capsys):
        """Test x**(1/2) in dimension 3 is refuted as predicted."""
        code, doc = run(capsys, "preserver", "--alpha", "0.5", "--dim", "3")
        assert code == EXIT_OK
        assert doc["outcome"] == "REFUTED"
        assert doc["consistent"] is True

    def test_transform_spec(self, capsys):
        """Test --transform selects a non-power transform."""
        code, doc = run(capsys, "preserver", "--transform", "atom:1", "--dim", "2")
        assert code == EXIT_OK
        assert doc["transform"]["type"] == "atom"

    def test_needs_one_transform(self, capsys):
        """Test --alpha and --transform are exclusive and one is required."""
        assert main(["preserver"]) == EXIT_USAGE
        assert main(["preserver", "--alpha", "2", "--transform", "const:1"]) == (
            EXIT_USAGE
        )
        assert "exactly one" in capsys.readouterr().err

    def test_grid_override(self, capsys):
        """Test --grid replaces the named family grids only."""
        code, doc = run(
            capsys, "preserver", "--alpha", "0.5", "--dim", "2",
            "--grid", "A2=1,2", "--grid", "b2=1/2,3;1,1",
        )
        assert code == EXIT_OK
        assert doc["outcome"] == "PASS"
        defaults = len(family_grid("SYM2", 2)) + len(family_grid("MONO2", 2))
        assert doc["points"] == 3 + defaults

    def test_grid_override_refutes(self, capsys):
        """Test a single C3 point still refutes x**(1/2) in dimension 3."""
        code, doc = run(
            capsys, "preserver", "--alpha", "0.5", "--dim", "3",
            "--grid", "A2=1,1", "--grid", "B2=1,1", "--grid", "SYM2=1,1",
            "--grid", "MONO2=1,2", "--grid", "C3=",
        )
        assert code == EXIT_OK
        assert doc["witness"]["family"] == "C3"
        assert doc["points"] == 5

    @pytest.mark.parametrize("value", ["A2", "Q7=1,2", "A2=x"])
    def test_bad_grid(self, capsys, value):
        """Test malformed --grid values are usage errors."""
        assert main(["preserver", "--alpha", "2", "--grid", value]) == EXIT_USAGE

    def test_seeded_samples(self, capsys):
        """Test --samples adds seeded random points to every family."""
        argv = ("preserver", "--alpha", "1", "--dim", "2", "--samples", "3")
        first = run(capsys, *argv, "--seed", "11")
        again = run(capsys, *argv, "--seed", "11")
        assert first == again
        assert first[0] == EXIT_OK
        defaults = sum(len(family_grid(f, 2)) for f in families_for(2))
        assert first[1]["points"] == defaults + 3 * len(families_for(2))


class TestKernelCommands:
    """Tests for whitney, embed2x2 and embedsym."""

    def test_whitney(self, capsys):
        """Test the rank-one kernel is lifted to TP_2."""
        code, doc = run(capsys, "whitney", "[[1, 1], [1, 1]]")
        assert code == EXIT_OK
        assert doc["rank"] == 1
        assert doc["verdict"]["status"] == "TP"

    def test_whitney_refuses_non_tn(self, capsys):
        """Test a non-TN kernel is refused with exit 1."""
        code, doc = run(capsys, "whitney", "[[0, 1], [1, 0]]")
        assert code == EXIT_FAIL
        assert doc["input"]["status"] == "FAIL"

    def test_whitney_grid_length(self, capsys):
        """Test --grid must match the matrix size."""
        assert main(["whitney", "[[1, 1], [1, 1]]", "--grid", "0,1,2"]) == EXIT_USAGE

    def test_whitney_step_kernel(self, capsys):
        """Test the 5x5 step kernel is certified TP_2 in fixed point."""
        rows = [[int(i >= 2 and j >= 2) for j in range(5)] for i in range(5)]
        code, doc = run(capsys, "whitney", json.dumps(rows), "-p", "2")
        assert code == EXIT_OK
        assert doc["verdict"]["status"] == "TP"
        assert doc["precision_bits"] > 0

    def test_whitney_needs_input(self, capsys):
        """Test a matrix is required unless --approximate is given."""
        assert main(["whitney"]) == EXIT_USAGE
        assert "matrix input" in capsys.readouterr().err

    def test_whitney_approximate(self, capsys, tmp_path):
        """Test the fc scheme for K = 1 writes its report and CSV."""
        csv_path = tmp_path / "approx.csv"
        code, doc = run(
            capsys, "whitney", "--approximate", "fc", "--n", "4", "-p", "2",
            "--d", "2", "--points=1,-1;1,1;2,-1;2,1", "--csv", str(csv_path),
        )
        assert code == EXIT_OK
        assert doc["mode"] == "fc"
        assert doc["verdict"]["status"] == "TP"
        assert doc["max_error"] < 0.05
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "x,y,n,scaled,target,abs_error"
        assert len(lines) == 5

    def test_whitney_approximate_kernel(self, capsys):
        """Test --kernel takes an expression in x and y."""
        code, doc = run(
            capsys, "whitney", "--approximate", "cc", "--n", "2", "-p", "1",
            "--kernel", "exp(-(x - y)**2)", "--points=0,0;1,1/2",
        )
        assert code == EXIT_OK
        assert doc["kernel"] == "exp(-(x - y)**2)"
        assert doc["csv"] is None
        assert [pt["target"] for pt in doc["points"]] == pytest.approx(
            [1.0, math.exp(-0.25)]
        )

    @pytest.mark.parametrize(
        "argv",
        [
            ["[[1, 1], [1, 1]]", "--approximate", "fc", "--points=1,0"],
            ["--approximate", "fc", "--d", "1"],
            ["--approximate", "cc", "--kernel", "z + 1", "--points=0,0"],
            ["--approximate", "cc", "--points=0,0,1"],
            ["--approximate", "fc", "--points=1,0"],
        ],
    )
    def test_whitney_approximate_usage(self, capsys, argv):
        """Test malformed --approximate invocations are usage errors."""
        assert main(["whitney", *argv]) == EXIT_USAGE

    def test_embed2x2(self, capsys):
        """Test a 3x3 completion is certified TP."""
        code, doc = run(
            capsys, "embed2x2", "[[1, 2], [3, 7]]",
            "--shape", "3", "3", "--rows", "0", "2", "--cols", "0", "2",
        )
        assert code == EXIT_OK
        assert doc["embedding"]["case"] == "generic"
        assert doc["certificate"]["status"] == "TP"
        assert len(doc["matrix"]["rows"]) == 3

    def test_embed2x2_not_tp(self, capsys):
        """Test a non-TP input exits 1 with its witness."""
        code, doc = run(capsys, "embed2x2", "[[1, 2], [3, 4]]")
        assert code == EXIT_FAIL
        assert doc["input"]["witness"]["value"] == "-2"

    def test_embedsym(self, capsys):
        """Test the Hankel embedding is certified on extra points."""
        code, doc = run(
            capsys, "embedsym", "[[2, 1], [1, 2]]", "--points", "0,1/2,1"
        )
        assert code == EXIT_OK
        assert doc["points"] == [0.0, 0.5, 1.0]


class TestPolyaCommands:
    """Tests for pff, pfseq and jain."""

    def test_laplace(self, capsys):
        """Test the transform report of M_1."""
        code, doc = run(capsys, "pff", "laplace", "--family", "M", "--alpha", "1")
        assert code == EXIT_OK
        assert doc["transform"]["numerator"] == ["12"]
        assert doc["strip"] == [-1.0, 1.0]

    @pytest.mark.parametrize(("power", "expected"), [(1, EXIT_OK), (2, EXIT_FAIL)])
    def test_obstruct(self, capsys, power, expected):
        """Test COMPATIBLE exits 0 and OBSTRUCTED exits 1."""
        code, doc = run(
            capsys, "pff", "obstruct", "--family", "M", "--power", str(power)
        )
        assert code == expected
        assert doc["n"] == power

    def test_obstruct_irrational(self, capsys):
        """Test exponents given as sympy expressions."""
        code, doc = run(
            capsys, "pff", "obstruct", "--family", "N",
            "--a", "1,sqrt(2),sqrt(3)", "--power", "2",
        )
        assert code == EXIT_FAIL
        assert doc["verdict"] == "OBSTRUCTED"

    def test_degenerate_exponents(self, capsys):
        """Test coinciding exponent sums are reported as a usage error."""
        argv = ["pff", "obstruct", "--family", "N", "--a", "1,2,3", "--power", "2"]
        assert main(argv) == EXIT_USAGE

    def test_eval(self, capsys):
        """Test pointwise values of lambda."""
        code, doc = run(capsys, "pff", "eval", "--family", "lambda", "--x=-1,0")
        assert code == EXIT_OK
        assert doc["values"] == [0.0, 1.0]

    def test_toeplitz_seeded(self, capsys):
        """Test the random sample points are reproducible from the seed."""
        argv = ("pff", "toeplitz", "--family", "gauss", "--seed", "7")
        first = run(capsys, *argv)
        second = run(capsys, *argv)
        assert first == second
        assert first[0] == EXIT_OK

    def test_pfseq_check(self, capsys):
        """Test (1, 0, 1) is not a PF sequence."""
        code, doc = run(capsys, "pfseq", "check", "--coeffs", "1,0,1", "-p", "2")
        assert code == EXIT_FAIL
        assert doc["sequence"]["coeffs"] == ["1", "0", "1"]

    @pytest.mark.parametrize(
        ("coeffs", "expected"), [("1,2,1", EXIT_OK), ("1,1,1", EXIT_FAIL)]
    )
    def test_pfseq_poly(self, capsys, coeffs, expected):
        """Test generating-polynomial certificates."""
        code, doc = run(capsys, "pfseq", "poly", "--coeffs", coeffs)
        assert code == expected
        assert doc["degree"] == 2

    @pytest.mark.parametrize(
        ("alpha", "expected"), [("3", EXIT_OK), ("1/2", EXIT_FAIL)]
    )
    def test_jain(self, capsys, alpha, expected):
        """Test PSD exits 0 and a predicted PSD failure exits 1."""
        code, doc = run(
            capsys, "jain", "--n", "5", "--theta", "pi/10", "--alpha", alpha
        )
        assert code == expected
        assert doc["psd"] is (expected == EXIT_OK)


class TestParser:
    """Tests for argument parsing helpers."""

    def test_version(self, capsys):
        """Test --version prints and exits 0."""
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(["--version"])
        assert info.value.code == 0
        assert "totpos" in capsys.readouterr().out

    def test_unknown_command(self, capsys):
        """Test an unknown subcommand is a usage error."""
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_parse_real(self):
        """Test rationals stay exact and expressions become floats."""
        assert parse_real("3/4").is_Rational
        assert float(parse_real("pi/10")) == pytest.approx(0.3141592653589793)
        with pytest.raises(UsageError, match="Not a real number"):
            parse_real("x + 1")


VERDICT_KEYS = {"command", "shape", "verdict"}
LIFT_KEYS = {"rank", "iterations", "verdict", "precision_bits"}


class TestReportKeys:
    """Golden key sets of every report."""

    @pytest.mark.parametrize(
        ("argv", "keys"),
        [
            (["check", "[[1, 2], [3, 4]]"], VERDICT_KEYS | {"kind", "strict"}),
            (["fekete", "[[1, 1], [1, 2]]"], VERDICT_KEYS),
            (["hankel", "1,0,1"], {"command", "moments", "strict", "verdict"}),
            (
                ["preserver", "--alpha", "1", "--dim", "2"],
                {
                    "command", "transform", "dimension", "symmetric", "strict",
                    "expected", "outcome", "grid_relative", "covered",
                    "consistent", "points", "witness",
                },
            ),
            (
                ["whitney", "[[1, 1], [1, 1]]"],
                LIFT_KEYS | {"command", "kappa", "xs", "ys", "values"},
            ),
            (
                [
                    "whitney", "--approximate", "fc", "--n", "2", "-p", "1",
                    "--d", "2", "--points=1,0;2,1",
                ],
                LIFT_KEYS
                | {
                    "command", "kernel", "csv", "mode", "n", "p", "scale",
                    "max_error", "points",
                },
            ),
            (
                ["embed2x2", "[[1, 2], [3, 7]]"],
                {"command", "embedding", "matrix", "certificate"},
            ),
            (
                ["embedsym", "[[2, 1], [1, 2]]"],
                {"command", "embedding", "points", "certificate"},
            ),
            (["embed2x2", "[[1, 2], [3, 4]]"], {"command", "error", "input"}),
            (
                ["pff", "laplace", "--family", "M"],
                {"command", "family", "transform", "strip"},
            ),
            (
                ["pff", "obstruct", "--family", "M", "--power", "2"],
                {
                    "command", "family", "n", "verdict", "numerator_degree",
                    "denominator_degree", "transform", "endpoint_ratio",
                    "root_values",
                },
            ),
            (
                ["pff", "eval", "--family", "phi"],
                {"command", "family", "x", "values"},
            ),
            (
                ["pff", "discretize", "--family", "gauss", "--N", "2"],
                {"command", "family", "N", "power", "sequence", "verdict"},
            ),
            (
                ["pff", "toeplitz", "--family", "gauss"],
                {"command", "family", "seed", "points", "verdict"},
            ),
            (
                ["pfseq", "check", "--coeffs", "1,2,1"],
                {"command", "sequence", "verdict"},
            ),
            (
                ["pfseq", "poly", "--coeffs", "1,2,1"],
                {
                    "command", "coeffs", "passed", "degree", "zero_multiplicity",
                    "negative_roots", "positive_coeffs",
                },
            ),
            (
                ["jain", "--n", "3", "--theta", "pi/10", "--alpha", "2"],
                {
                    "command", "n", "theta", "alpha", "psd", "expected_psd",
                    "min_eigenvalue", "tn", "base_tn", "rank2_residual",
                    "det2_residual", "matrix",
                },
            ),
        ],
        ids=lambda value: " ".join(value) if isinstance(value, list) else None,
    )
    def test_keys(self, capsys, argv, keys):
        """Test the report has exactly the documented keys."""
        code, doc = run(capsys, *argv)
        assert code in (EXIT_OK, EXIT_FAIL)
        assert set(doc) == keys

    def test_verdict_keys(self, capsys):
        """Test the nested verdict document."""
        _, doc = run(capsys, "check", "[[1, 2], [3, 4]]", "--strict")
        assert set(doc["verdict"]) == {"status", "order", "witness", "tol", "ambiguous"}
        assert set(doc["verdict"]["witness"]) == {"rows", "cols", "value"}
