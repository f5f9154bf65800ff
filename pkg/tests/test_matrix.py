"""Tests for RationalMatrix, determinants and TN/TP verdicts."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from totpos import (
    AmbiguousVerdictWarning,
    Kind,
    KernelGrid,
    MinorIndex,
    RationalMatrix,
    Status,
    Verdict,
    Witness,
    check,
    check_kernel,
    contiguous_check,
    contiguous_minors,
    det,
    fekete_tp,
    generalized_vandermonde,
    hadamard_bound,
    hankel_check,
    hankel_matrix,
    minors,
    resolve_tol,
    toeplitz_matrix,
)


@pytest.fixture
def vandermonde():
    """3x3 exact generalized Vandermonde on nodes 1, 2, 3."""
    return generalized_vandermonde([1, 2, 3], [0, 1, 2])


small_ints = st.integers(min_value=-4, max_value=6)
square_rows = st.integers(min_value=1, max_value=4).flatmap(
    lambda n: st.lists(
        st.lists(small_ints, min_size=n, max_size=n), min_size=n, max_size=n
    )
)
small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)
rational_rows = st.integers(min_value=1, max_value=5).flatmap(
    lambda n: st.lists(
        st.lists(small_fractions, min_size=n, max_size=n), min_size=n, max_size=n
    )
)


@st.composite
def perturbed_vandermonde(draw):
    """A 4x4 exact TP Vandermonde matrix, with one entry shifted half the time."""
    nodes = draw(
        st.lists(
            st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=4),
            min_size=4,
            max_size=4,
            unique=True,
        )
    )
    powers = draw(st.lists(st.integers(0, 5), min_size=4, max_size=4, unique=True))
    rows = [list(row) for row in generalized_vandermonde(sorted(nodes), sorted(powers))]
    shift = draw(
        st.none()
        | st.tuples(
            st.integers(0, 3),
            st.integers(0, 3),
            st.fractions(min_value=-8, max_value=8, max_denominator=4),
        )
    )
    if shift is not None:
        i, j, delta = shift
        rows[i][j] += delta
    return RationalMatrix.exact(rows), shift is None


def cofactor_det(rows):
    """Determinant by Laplace expansion along the first row."""
    if len(rows) == 1:
        return rows[0][0]
    return sum(
        (-1) ** j * rows[0][j] * cofactor_det([r[:j] + r[j + 1 :] for r in rows[1:]])
        for j in range(len(rows))
    )


class TestRationalMatrix:
    """Tests for construction and arithmetic."""

    def test_exact_entries_normalized(self):
        """Test string entries are parsed into Fractions in lowest terms."""
        m = RationalMatrix.exact([[1, "2/4"], [0, 3]])
        assert m[0, 1] == Fraction(1, 2)
        assert m.kind is Kind.EXACT

    def test_kind_inferred_from_floats(self):
        """Test a single float entry makes the matrix float."""
        m = RationalMatrix([[1, 2.5], [3, 4]])
        assert m.kind is Kind.FLOAT
        assert m[0, 0] == 1.0

    def test_float_entry_rejected_as_exact(self):
        """Test non-integral floats cannot be stored exactly."""
        with pytest.raises(ValueError, match="Exact kind"):
            RationalMatrix.exact([[0.5]])

    def test_ragged_rows_rejected(self):
        """Test rows of different length raise."""
        with pytest.raises(ValueError, match="Ragged"):
            RationalMatrix([[1, 2], [3]])

    def test_empty_rejected(self):
        """Test an empty matrix raises."""
        with pytest.raises(ValueError):
            RationalMatrix([])

    def test_non_finite_rejected(self):
        """Test NaN and infinity are rejected."""
        with pytest.raises(ValueError, match="Non-finite"):
            RationalMatrix.floats([[float("nan")]])

    def test_matmul_exact(self):
        """Test exact products stay exact."""
        a = RationalMatrix.exact([[1, 2], [3, 4]])
        product = a @ RationalMatrix.identity(2)
        assert product == a

    def test_transpose_and_submatrix(self):
        """Test transpose and submatrix selection."""
        m = RationalMatrix.exact([[1, 2, 3], [4, 5, 6]])
        assert m.transpose().shape == (3, 2)
        assert m.submatrix([1], [0, 2]).rows == ((Fraction(4), Fraction(6)),)

    def test_submatrix_out_of_range(self):
        """Test out-of-range indices raise."""
        m = RationalMatrix.identity(2)
        with pytest.raises(ValueError, match="out of range"):
            m.submatrix([0, 2], [0, 1])

    def test_equality_respects_kind(self):
        """Test exact and float copies of a matrix are not equal."""
        exact = RationalMatrix.exact([[1, 2], [3, 4]])
        assert exact != exact.as_float()
        assert hash(exact) == hash(RationalMatrix.exact([[1, 2], [3, 4]]))

    def test_from_numpy_round_trip(self):
        """Test conversion to and from numpy."""
        array = np.array([[1.5, 2.0], [0.0, -1.0]])
        m = RationalMatrix.from_numpy(array)
        np.testing.assert_array_equal(m.to_numpy(), array)

    def test_symmetry(self):
        """Test symmetric detection."""
        assert RationalMatrix.exact([[2, 1], [1, 2]]).is_symmetric()
        assert not RationalMatrix.exact([[2, 1], [0, 2]]).is_symmetric()


class TestDeterminant:
    """Tests for det and the Hadamard bound."""

    def test_exact_singular(self):
        """Test a singular exact matrix has determinant 0."""
        assert det(RationalMatrix.exact([[2, 6], [1, 3]])) == 0

    def test_exact_with_fractions(self):
        """Test Bareiss elimination with rational entries."""
        m = RationalMatrix.exact([["1/2", "1/3"], ["1/4", "1/5"]])
        assert det(m) == Fraction(1, 10) - Fraction(1, 12)

    def test_exact_needs_pivot(self):
        """Test a zero leading entry triggers a row swap."""
        assert det(RationalMatrix.exact([[0, 1], [1, 0]])) == -1

    def test_float(self):
        """Test float determinants use LU."""
        value = det(RationalMatrix.floats([[1, 2], [3, 4]]))
        assert value == pytest.approx(-2.0)

    def test_not_square(self):
        """Test a rectangular matrix raises."""
        with pytest.raises(ValueError, match="square"):
            det(RationalMatrix.exact([[1, 2, 3], [4, 5, 6]]))

    def test_hadamard_bound_identity(self):
        """Test the Hadamard bound of the identity is 1."""
        assert hadamard_bound(RationalMatrix.identity(3)) == pytest.approx(1.0)

    @given(rational_rows)
    @settings(max_examples=1000, deadline=None)
    def test_exact_matches_cofactor_expansion(self, rows):
        """Test Bareiss elimination equals the cofactor expansion exactly."""
        assert det(RationalMatrix.exact(rows)) == cofactor_det(rows)

    @given(square_rows)
    @settings(max_examples=60, deadline=None)
    def test_hadamard_inequality(self, rows):
        """Test |det| never exceeds the Hadamard bound."""
        m = RationalMatrix.exact(rows)
        assert abs(float(det(m))) <= hadamard_bound(m) * (1 + 1e-9)


class TestMinors:
    """Tests for minor enumeration order."""

    def test_count_and_order(self):
        """Test every minor up to order 2 of a 3x3 matrix, first one first."""
        m = RationalMatrix.identity(3)
        listed = list(minors(m, 2))
        assert len(listed) == 9 + 9
        assert listed[0][0] == MinorIndex((0,), (0,))
        assert listed[9][0] == MinorIndex((0, 1), (0, 1))

    def test_order_out_of_range(self):
        """Test p outside [1, min(m, n)] raises."""
        m = RationalMatrix.identity(2)
        with pytest.raises(ValueError, match="Order p"):
            list(minors(m, 3))
        with pytest.raises(ValueError, match="Order p"):
            list(minors(m, 0))


class TestCheck:
    """Tests for check()."""

    def test_strict_failure_witness(self):
        """Test the witness of a negative 2x2 determinant."""
        verdict = check(RationalMatrix.exact([[1, 2], [3, 4]]), strict=True)
        assert verdict.status is Status.FAIL
        assert verdict.witness == Witness(MinorIndex((0, 1), (0, 1)), Fraction(-2))
        assert not verdict

    def test_permutation_matrix(self):
        """Test the antidiagonal permutation is TN_1 but not TN_2."""
        m = RationalMatrix.exact([[0, 1], [1, 0]])
        assert check(m, 1).status is Status.TN
        assert check(m, 2).witness.value == -1

    def test_identity_is_tn_not_tp(self):
        """Test the first zero entry refutes strict positivity."""
        m = RationalMatrix.identity(3)
        assert check(m).status is Status.TN
        verdict = check(m, strict=True)
        assert verdict.witness.index == MinorIndex((0,), (1,))
        assert verdict.witness.value == 0

    def test_vandermonde_tp(self, vandermonde):
        """Test a generalized Vandermonde matrix is TP."""
        verdict = check(vandermonde, 3, strict=True)
        assert verdict.status is Status.TP
        assert verdict.examined == 9 + 9 + 1

    def test_exact_rejects_tolerance(self, vandermonde):
        """Test exact matrices refuse a positive tolerance."""
        with pytest.raises(ValueError, match="tol=0"):
            check(vandermonde, tol=1e-9)

    def test_negative_tolerance(self):
        """Test negative tolerances raise."""
        with pytest.raises(ValueError, match="non-negative"):
            resolve_tol(RationalMatrix.floats([[1.0]]), -1.0)

    def test_float_default_tolerance(self):
        """Test float matrices default to the configured tolerance."""
        verdict = check(RationalMatrix.floats([[1, 1], [1, 1]]))
        assert verdict.status is Status.TN
        assert verdict.tol == 1e-9

    def test_ambiguous_warning(self):
        """Test a determinant within 10x of the gate warns."""
        m = RationalMatrix.floats([[1.0, 1.0], [1.0, 1.0 + 1e-9]])
        with pytest.warns(AmbiguousVerdictWarning):
            verdict = check(m, strict=True)
        assert verdict.ambiguous

    def test_ambiguous_warning_suppressed(self):
        """Test warn=False keeps the flag without warning."""
        m = RationalMatrix.floats([[1.0, 1.0], [1.0, 1.0 + 1e-9]])
        assert check(m, strict=True, warn=False).ambiguous

    def test_verdict_invariant(self):
        """Test FAIL verdicts need a witness and passing ones must not carry one."""
        with pytest.raises(ValueError, match="witness"):
            Verdict(Status.FAIL, 2)
        with pytest.raises(ValueError, match="witness"):
            Verdict(Status.TN, 1, 0.0, Witness(MinorIndex((0,), (0,)), Fraction(1)))

    @given(square_rows, st.booleans())
    @settings(max_examples=80, deadline=None)
    def test_witness_rechecks(self, rows, strict):
        """Test a FAIL witness is a real violating minor and a pass has none."""
        m = RationalMatrix.exact(rows)
        verdict = check(m, strict=strict)
        if verdict.passed:
            assert all(
                (v > 0 if strict else v >= 0) for _, v in minors(m, min(m.shape))
            )
        else:
            index = verdict.witness.index
            value = det(m.submatrix(index.rows, index.cols))
            assert value == verdict.witness.value
            assert (value <= 0) if strict else (value < 0)

    @given(
        st.lists(st.integers(1, 9), min_size=3, max_size=3, unique=True),
        st.lists(st.integers(0, 5), min_size=3, max_size=3, unique=True),
    )
    @settings(max_examples=40, deadline=None)
    def test_vandermonde_always_tp(self, nodes, exponents):
        """Test generalized Vandermonde matrices are TP for increasing data."""
        m = generalized_vandermonde(sorted(nodes), sorted(exponents))
        assert check(m, strict=True).status is Status.TP


class TestFekete:
    """Tests for the contiguous-minor TP certificate."""

    def test_tp_certificate(self, vandermonde):
        """Test Fekete agrees with the full check on a TP matrix."""
        verdict = fekete_tp(vandermonde)
        assert verdict.status is Status.TP
        assert verdict.examined == 9 + 4 + 1

    def test_failure_is_contiguous(self):
        """Test the Fekete witness is a contiguous minor."""
        m = RationalMatrix.exact([[1, 1, 1], [1, 2, 3], [1, 3, 5]])
        verdict = fekete_tp(m)
        assert verdict.status is Status.FAIL
        rows = verdict.witness.index.rows
        assert list(rows) == list(range(rows[0], rows[0] + len(rows)))

    def test_contiguous_minors(self):
        """Test contiguous minors of a 3x3 matrix up to order 2, in order."""
        listed = list(contiguous_minors(RationalMatrix.identity(3), 2))
        assert len(listed) == 9 + 4
        assert listed[9] == (MinorIndex((0, 1), (0, 1)), 1)
        assert listed[10] == (MinorIndex((0, 1), (1, 2)), 0)

    def test_contiguous_minors_are_minors(self, vandermonde):
        """Test every contiguous minor appears among all minors."""
        every = dict(minors(vandermonde, 3))
        for index, value in contiguous_minors(vandermonde):
            assert every[index] == value

    def test_contiguous_check_is_partial(self):
        """Test a lax contiguous pass can hide a negative spread-out minor."""
        m = RationalMatrix.exact([[0, 0, 1], [1, 0, 0]])
        assert contiguous_check(m).status is Status.TN
        full = check(m)
        assert full.witness.index == MinorIndex((0, 1), (0, 2))

    def test_contiguous_check_order(self, vandermonde):
        """Test p limits the contiguous orders examined."""
        verdict = contiguous_check(vandermonde, 2, strict=True)
        assert verdict.status is Status.TP
        assert verdict.examined == 9 + 4


class TestInvariants:
    """Verdicts are unchanged by reversal and positive diagonal scaling."""

    @given(square_rows, st.booleans())
    @settings(max_examples=60, deadline=None)
    def test_reversal(self, rows, strict):
        """Test reversing rows and columns together keeps the status."""
        m = RationalMatrix.exact(rows)
        expected = check(m, strict=strict).status
        assert check(m.reversed(), strict=strict).status is expected

    @given(
        square_rows,
        st.lists(st.fractions(min_value=Fraction(1, 4), max_value=4), min_size=8),
    )
    @settings(max_examples=60, deadline=None)
    def test_diagonal_scaling(self, rows, weights):
        """Test D1 M D2 has the status of M for positive diagonals."""
        m = RationalMatrix.exact(rows)
        n = m.nrows
        d1 = RationalMatrix.exact(
            [[weights[i] if i == j else 0 for j in range(n)] for i in range(n)]
        )
        d2 = RationalMatrix.exact(
            [[weights[4 + i] if i == j else 0 for j in range(n)] for i in range(n)]
        )
        scaled = d1 @ m @ d2
        for strict in (False, True):
            assert check(scaled, strict=strict).status is check(m, strict=strict).status

    @seed(20240611)
    @given(perturbed_vandermonde())
    @settings(max_examples=500, deadline=None)
    def test_fekete_matches_full_check(self, case):
        """Test the contiguous certificate agrees with every minor on 4x4 input."""
        m, unperturbed = case
        verdict = fekete_tp(m)
        assert verdict.passed == check(m, strict=True).passed
        if unperturbed:
            assert verdict.status is Status.TP

    @given(square_rows, st.booleans())
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_order(self, rows, strict):
        """Test a pass at order p implies a pass at every lower order."""
        m = RationalMatrix.exact(rows)
        passed = [check(m, p, strict=strict).passed for p in range(1, m.nrows + 1)]
        assert passed == sorted(passed, reverse=True)


class TestHankel:
    """Tests for Hankel moment checks."""

    def test_matrix_shape(self):
        """Test the Hankel matrix of 2n-1 moments is n x n."""
        assert hankel_matrix([1, 2, 3, 4, 5]).shape == (3, 3)

    def test_even_length(self):
        """Test an even number of moments raises."""
        with pytest.raises(ValueError, match="odd length"):
            hankel_check([1, 2])

    def test_shifted_witness(self):
        """Test a failure in the shifted block is reported in full indices."""
        verdict = hankel_check([1, 0, 1, 0, 1])
        assert verdict.status is Status.FAIL
        assert verdict.witness.index == MinorIndex((1, 2), (0, 1))
        assert verdict.witness.value == -1

    def test_psd_but_not_pd(self):
        """Test the all-ones Hankel matrix is TN but not TP."""
        assert hankel_check([1, 1, 1]).status is Status.TN
        assert hankel_check([1, 1, 1], strict=True).status is Status.FAIL

    def test_positive_definite(self):
        """Test a positive definite pair of blocks is TP."""
        assert hankel_check([1, 2, 5], strict=True).status is Status.TP

    def test_float_moments(self):
        """Test float moments go through the eigenvalue gate."""
        assert hankel_check([1.0, 0.5, 0.5]).status is Status.TN


class TestStructured:
    """Tests for Vandermonde, Toeplitz and sampled kernels."""

    def test_vandermonde_validation(self):
        """Test non-increasing or non-positive nodes raise."""
        with pytest.raises(ValueError, match="increasing"):
            generalized_vandermonde([2, 1], [0, 1])
        with pytest.raises(ValueError, match="positive"):
            generalized_vandermonde([0, 1], [0, 1])

    def test_vandermonde_float_exponents(self):
        """Test non-integral exponents produce a float matrix."""
        m = generalized_vandermonde([1, 4], [0, 0.5])
        assert m.kind is Kind.FLOAT
        assert m[1, 1] == pytest.approx(2.0)

    def test_toeplitz(self):
        """Test (f(x_i - y_j)) sampling."""
        m = toeplitz_matrix(lambda t: t * t, [0, 1], [0, 1])
        assert m.rows == ((0, 1), (1, 0))

    def test_check_kernel(self):
        """Test the sampled exponential kernel exp(xy) is TP."""
        grid = KernelGrid.from_function(
            lambda x, y: np.exp(x * y), (0, 0.5, 1), (0, 0.5, 1)
        )
        assert check_kernel(grid, 3, strict=True).status is Status.TP

    def test_kernel_grid_validation(self):
        """Test grids must be increasing and match the value shape."""
        with pytest.raises(ValueError):
            KernelGrid((1.0, 0.0), (0.0,), np.zeros((2, 1)))
        with pytest.raises(ValueError):
            KernelGrid((0.0, 1.0), (0.0,), np.zeros((1, 1)))
