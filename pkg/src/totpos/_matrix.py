"""
Dense matrices and total-positivity verdicts.

RationalMatrix holds exact (Fraction) or float entries. The functions in this
module enumerate minors in a fixed order (by order, then lexicographically by
rows, then by columns) so that the witness of a failing test is reproducible:

    >>> from totpos import RationalMatrix, check
    >>> verdict = check(RationalMatrix.exact([[0, 1], [1, 0]]), 2)
    >>> verdict.status.value, verdict.witness.value
    ('FAIL', Fraction(-1, 1))

Exact determinants use fraction-free (Bareiss) elimination on an integer
rescaling of the rows. Float determinants come from LU with partial pivoting,
and a float minor m of a submatrix with Hadamard bound H is judged against
``tol * H``:

- lax (TN):    m >= -tol * H
- strict (TP): m >  tol * H
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable, Iterable, Iterator, Sequence
from fractions import Fraction
from itertools import combinations
from typing import Any

import mpmath
import numpy as np

from totpos._config import get_settings
from totpos._scalar import Kind, Scalar, infer_kind, is_exact_value, to_scalar
from totpos._types import (
    AmbiguousVerdictWarning,
    KernelGrid,
    MinorIndex,
    Status,
    Verdict,
    Witness,
)

__all__ = [
    "RationalMatrix",
    "det",
    "minors",
    "contiguous_minors",
    "hadamard_bound",
    "check",
    "contiguous_check",
    "fekete_tp",
    "hankel_check",
    "generalized_vandermonde",
    "toeplitz_matrix",
    "hankel_matrix",
    "sample_kernel",
    "check_kernel",
    "resolve_tol",
]

# (index, value, hadamard bound) triples; the bound is 0.0 for exact minors
_MinorRecord = tuple[MinorIndex, Scalar, float]


class RationalMatrix:
    """
    Immutable dense matrix with homogeneous scalar kind.

    Args:
        rows: Sequence of equal-length rows. Entries may be ints, Fractions,
            ``"p/q"`` strings or floats.
        kind: ``"exact"`` or ``"float"``. Inferred when omitted: exact unless
            any entry is a float.

    Raises:
        ValueError: On empty or ragged input, non-finite floats, or inexact
            entries requested as exact.

    Example:
        >>> m = RationalMatrix.exact([[1, "1/2"], [0, 3]])
        >>> m.kind.value, m[0, 1]
        ('exact', Fraction(1, 2))
    """

    __slots__ = ("_rows", "_kind")

    def __init__(
        self,
        rows: Iterable[Iterable[Any]],
        kind: Kind | str | None = None,
    ) -> None:
        materialized = [list(row) for row in rows]
        if not materialized or not materialized[0]:
            raise ValueError("A matrix needs at least one row and one column")
        width = len(materialized[0])
        for i, row in enumerate(materialized):
            if len(row) != width:
                raise ValueError(
                    f"Ragged rows: row 0 has {width} entries, row {i} has {len(row)}"
                )
        if kind is None:
            resolved = infer_kind(v for row in materialized for v in row)
        else:
            resolved = Kind(kind)
        self._kind = resolved
        self._rows: tuple[tuple[Scalar, ...], ...] = tuple(
            tuple(to_scalar(v, resolved) for v in row) for row in materialized
        )

    @classmethod
    def from_rows(
        cls,
        rows: Iterable[Iterable[Any]],
        kind: Kind | str | None = None,
    ) -> RationalMatrix:
        return cls(rows, kind)

    @classmethod
    def exact(cls, rows: Iterable[Iterable[Any]]) -> RationalMatrix:
        return cls(rows, Kind.EXACT)

    @classmethod
    def floats(cls, rows: Iterable[Iterable[Any]]) -> RationalMatrix:
        return cls(rows, Kind.FLOAT)

    @classmethod
    def from_numpy(cls, array: np.ndarray) -> RationalMatrix:
        array = np.atleast_2d(np.asarray(array, dtype=float))
        return cls(array.tolist(), Kind.FLOAT)

    @classmethod
    def identity(cls, n: int, kind: Kind | str = Kind.EXACT) -> RationalMatrix:
        return cls([[int(i == j) for j in range(n)] for i in range(n)], kind)

    @classmethod
    def ones(
        cls, nrows: int, ncols: int | None = None, kind: Kind | str = Kind.EXACT
    ) -> RationalMatrix:
        ncols = nrows if ncols is None else ncols
        return cls([[1] * ncols for _ in range(nrows)], kind)

    @property
    def kind(self) -> Kind:
        return self._kind

    @property
    def is_exact(self) -> bool:
        return self._kind is Kind.EXACT

    @property
    def rows(self) -> tuple[tuple[Scalar, ...], ...]:
        return self._rows

    @property
    def nrows(self) -> int:
        return len(self._rows)

    @property
    def ncols(self) -> int:
        return len(self._rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __getitem__(self, key: tuple[int, int]) -> Scalar:
        i, j = key
        return self._rows[i][j]

    def __iter__(self) -> Iterator[tuple[Scalar, ...]]:
        return iter(self._rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self._kind is other._kind and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self._kind, self._rows))

    def __repr__(self) -> str:
        body = ", ".join(
            "[" + ", ".join(str(v) for v in row) + "]" for row in self._rows
        )
        return f"RationalMatrix({self._kind.value}, [{body}])"

    def map(
        self, fn: Callable[[Scalar], Any], kind: Kind | str | None = None
    ) -> RationalMatrix:
        """Entrywise image; kind defaults to this matrix's kind."""
        target = self._kind if kind is None else Kind(kind)
        return RationalMatrix([[fn(v) for v in row] for row in self._rows], target)

    def as_float(self) -> RationalMatrix:
        if not self.is_exact:
            return self
        return self.map(float, Kind.FLOAT)

    def __add__(self, other: RationalMatrix) -> RationalMatrix:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        if self.shape != other.shape:
            raise ValueError(f"Shape mismatch: {self.shape} vs {other.shape}")
        kind = Kind.EXACT if self.is_exact and other.is_exact else Kind.FLOAT
        return RationalMatrix(
            [
                [a + b for a, b in zip(r1, r2, strict=True)]
                for r1, r2 in zip(self._rows, other._rows, strict=True)
            ],
            kind,
        )

    def scale(self, factor: Any) -> RationalMatrix:
        """Multiply every entry by a scalar; stays exact only for exact factors."""
        if self.is_exact and is_exact_value(factor):
            c: Scalar = to_scalar(factor, Kind.EXACT)
            return self.map(lambda v: v * c)
        c = float(factor)
        return RationalMatrix(
            [[float(v) * c for v in row] for row in self._rows], Kind.FLOAT
        )

    def __matmul__(self, other: RationalMatrix) -> RationalMatrix:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        if self.ncols != other.nrows:
            raise ValueError(f"Cannot multiply {self.shape} by {other.shape}")
        if not (self.is_exact and other.is_exact):
            return RationalMatrix.from_numpy(self.to_numpy() @ other.to_numpy())
        cols = list(zip(*other._rows, strict=True))
        product = [[_dot(row, col) for col in cols] for row in self._rows]
        return RationalMatrix(product, Kind.EXACT)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> RationalMatrix:
        """Rows and columns selected by index (order preserved as given)."""
        for i in rows:
            if not 0 <= i < self.nrows:
                raise ValueError(f"Row index {i} out of range for {self.nrows} rows")
        for j in cols:
            if not 0 <= j < self.ncols:
                raise ValueError(
                    f"Column index {j} out of range for {self.ncols} columns"
                )
        return RationalMatrix(
            [[self._rows[i][j] for j in cols] for i in rows], self._kind
        )

    def transpose(self) -> RationalMatrix:
        return RationalMatrix(zip(*self._rows, strict=True), self._kind)

    def reversed(self) -> RationalMatrix:
        """Reverse the order of both rows and columns."""
        return RationalMatrix([row[::-1] for row in self._rows[::-1]], self._kind)

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self._rows], dtype=float)

    def to_mpmath(self, prec: int = 50) -> mpmath.matrix:
        """Convert to an mpmath matrix at ``prec`` decimal digits.

        Exact entries are converted as ratios, so no binary rounding is
        introduced before the working precision.
        """
        with mpmath.workdps(prec):
            out = mpmath.matrix(self.nrows, self.ncols)
            for i, row in enumerate(self._rows):
                for j, v in enumerate(row):
                    if isinstance(v, Fraction):
                        out[i, j] = mpmath.mpf(v.numerator) / v.denominator
                    else:
                        out[i, j] = mpmath.mpf(v)
        return out

    def is_symmetric(self, rtol: float = 0.0) -> bool:
        if not self.is_square:
            return False
        if self.is_exact or rtol == 0:
            return self._rows == tuple(zip(*self._rows, strict=True))
        values = self.to_numpy()
        scale = float(np.max(np.abs(values))) or 1.0
        return bool(np.all(np.abs(values - values.T) <= rtol * scale))


def _dot(row: Sequence[Scalar], col: Sequence[Scalar]) -> Fraction:
    products = (a * b for a, b in zip(row, col, strict=True))
    return sum(products, Fraction(0))  # type: ignore[return-value]


def det(matrix: RationalMatrix) -> Scalar:
    """
    Determinant of a square matrix.

    Exact matrices use fraction-free elimination and return a Fraction.
    Float matrices use LU with partial pivoting and return a float.

    Raises:
        ValueError: If the matrix is not square.

    Example:
        >>> det(RationalMatrix.exact([[2, 6], [1, 3]]))
        Fraction(0, 1)
    """
    if not matrix.is_square:
        raise ValueError(f"Matrix must be square, got {matrix.nrows}x{matrix.ncols}")
    if matrix.is_exact:
        return _bareiss(matrix.rows)  # type: ignore[arg-type]
    return _float_det(matrix.to_numpy())


def _bareiss(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(rows)
    scale = 1
    work: list[list[int]] = []
    for row in rows:
        lcm = math.lcm(*(v.denominator for v in row))
        work.append([v.numerator * (lcm // v.denominator) for v in row])
        scale *= lcm
    sign = 1
    previous = 1
    for k in range(n - 1):
        if work[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if work[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            work[k], work[swap] = work[swap], work[k]
            sign = -sign
        pivot = work[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                work[i][j] = (work[i][j] * pivot - work[i][k] * work[k][j]) // previous
        previous = pivot
    return Fraction(sign * work[n - 1][n - 1], scale)


def _float_det(block: np.ndarray) -> float:
    if block.shape == (1, 1):
        return float(block[0, 0])
    return float(np.linalg.det(block))


def _hadamard(block: np.ndarray) -> float:
    rows = float(np.prod(np.linalg.norm(block, axis=1)))
    cols = float(np.prod(np.linalg.norm(block, axis=0)))
    return min(rows, cols)


def hadamard_bound(matrix: RationalMatrix) -> float:
    """
    Hadamard bound of a square matrix.

    The smaller of the product of row 2-norms and the product of column
    2-norms; either bounds |det|.
    """
    if not matrix.is_square:
        raise ValueError(f"Matrix must be square, got {matrix.nrows}x{matrix.ncols}")
    return _hadamard(matrix.to_numpy())


def _validate_order(matrix: RationalMatrix, p: int | None) -> int:
    limit = min(matrix.shape)
    if p is None:
        return limit
    if not 1 <= p <= limit:
        raise ValueError(f"Order p must be in [1, {limit}], got {p}")
    return p


def _minor_stream(
    matrix: RationalMatrix, p: int, contiguous: bool = False
) -> Iterator[_MinorRecord]:
    m, n = matrix.shape
    array = None if matrix.is_exact else matrix.to_numpy()
    for k in range(1, p + 1):
        if contiguous:
            row_sets: Iterable[tuple[int, ...]] = (
                tuple(range(i, i + k)) for i in range(m - k + 1)
            )
        else:
            row_sets = combinations(range(m), k)
        for rows in row_sets:
            if contiguous:
                col_sets: Iterable[tuple[int, ...]] = [
                    tuple(range(j, j + k)) for j in range(n - k + 1)
                ]
            else:
                col_sets = combinations(range(n), k)
            for cols in col_sets:
                index = MinorIndex(rows, cols)
                if array is None:
                    sub = [[matrix.rows[i][j] for j in cols] for i in rows]
                    value: Scalar = _bareiss(sub)  # type: ignore[arg-type]
                    yield index, value, 0.0
                else:
                    block = array[np.ix_(rows, cols)]
                    yield index, _float_det(block), _hadamard(block)


def minors(matrix: RationalMatrix, p: int) -> Iterator[tuple[MinorIndex, Scalar]]:
    """
    Every minor of order <= p, each exactly once.

    Minors come by increasing order, then lexicographically by row tuple,
    then by column tuple.

    Raises:
        ValueError: If p is outside [1, min(rows, cols)].
    """
    order = _validate_order(matrix, p)
    for index, value, _bound in _minor_stream(matrix, order):
        yield index, value


def contiguous_minors(
    matrix: RationalMatrix, p: int | None = None
) -> Iterator[tuple[MinorIndex, Scalar]]:
    """
    Minors of order <= p on consecutive rows and consecutive columns.

    Same ordering as ``minors``; p defaults to min(rows, cols).

    Example:
        >>> [str(v) for _, v in contiguous_minors(RationalMatrix([[1, 1], [1, 2]]))]
        ['1', '1', '1', '2', '1']
    """
    order = _validate_order(matrix, p)
    for index, value, _bound in _minor_stream(matrix, order, contiguous=True):
        yield index, value


def resolve_tol(matrix: RationalMatrix, tol: float | None) -> float:
    """Default and validate a tolerance for the matrix's kind."""
    if tol is None:
        return 0.0 if matrix.is_exact else get_settings().tol
    if tol < 0:
        raise ValueError(f"Tolerance must be non-negative, got {tol}")
    if matrix.is_exact and tol > 0:
        raise ValueError("Exact matrices are checked with tol=0")
    return float(tol)


def _flips(value: Scalar, bound: float, tol: float, strict: bool) -> bool:
    if tol <= 0:
        return False
    v = float(value)
    if strict:
        return tol * bound / 10 < v <= 10 * tol * bound
    return -10 * tol * bound <= v < -tol * bound / 10


def scan_minors(
    records: Iterable[_MinorRecord], order: int, strict: bool, tol: float
) -> Verdict:
    """Judge a minor stream, stopping at the first violation."""
    ambiguous = False
    examined = 0
    for index, value, bound in records:
        examined += 1
        threshold = tol * bound
        ok = value > threshold if strict else value >= -threshold
        ambiguous = ambiguous or _flips(value, bound, tol, strict)
        if not ok:
            return Verdict(
                Status.FAIL, order, tol, Witness(index, value), ambiguous, examined
            )
    status = Status.TP if strict else Status.TN
    return Verdict(status, order, tol, None, ambiguous, examined)


def _warn_if_ambiguous(verdict: Verdict) -> Verdict:
    if verdict.ambiguous:
        warnings.warn(
            f"{verdict.status.value} verdict at order {verdict.order} flips within "
            f"10x of tol={verdict.tol:g}",
            AmbiguousVerdictWarning,
            stacklevel=3,
        )
    return verdict


def check(
    matrix: RationalMatrix,
    p: int | None = None,
    strict: bool = False,
    tol: float | None = None,
    *,
    warn: bool = True,
) -> Verdict:
    """
    Test whether a matrix is TN_p (lax) or TP_p (strict).

    Args:
        matrix: Matrix to test.
        p: Largest minor order examined; defaults to min(rows, cols).
        strict: Require positive minors (TP) instead of non-negative (TN).
        tol: Hadamard-relative tolerance. Defaults to 0 for exact matrices
            and ``Settings.tol`` for float ones.
        warn: Emit AmbiguousVerdictWarning for ambiguous verdicts.

    Returns:
        Verdict with the first violating minor as witness on failure.

    Raises:
        ValueError: If p is out of range, tol is negative, or tol > 0 is
            given for an exact matrix.

    Example:
        >>> v = check(generalized_vandermonde([1, 2, 3], [0, 1, 2]), 3, strict=True)
        >>> v.status.value
        'TP'
    """
    order = _validate_order(matrix, p)
    tolerance = resolve_tol(matrix, tol)
    verdict = scan_minors(_minor_stream(matrix, order), order, strict, tolerance)
    return _warn_if_ambiguous(verdict) if warn else verdict


def fekete_tp(
    matrix: RationalMatrix, tol: float | None = None, *, warn: bool = True
) -> Verdict:
    """
    Full-order TP test through contiguous minors only.

    A matrix whose contiguous minors are all positive is TP (Fekete), so a
    PASS here is a full TP certificate. On failure the witness is the first
    failing contiguous minor.
    """
    verdict = contiguous_check(matrix, None, True, tol, warn=False)
    return _warn_if_ambiguous(verdict) if warn else verdict


def contiguous_check(
    matrix: RationalMatrix,
    p: int | None = None,
    strict: bool = False,
    tol: float | None = None,
    *,
    warn: bool = True,
) -> Verdict:
    """
    Like ``check``, but only over contiguous minors.

    A lax pass is not a TN certificate on its own; a strict pass at full
    order is a TP certificate (see ``fekete_tp``).
    """
    order = _validate_order(matrix, p)
    tolerance = resolve_tol(matrix, tol)
    records = _minor_stream(matrix, order, contiguous=True)
    verdict = scan_minors(records, order, strict, tolerance)
    return _warn_if_ambiguous(verdict) if warn else verdict


def hankel_matrix(moments: Sequence[Any]) -> RationalMatrix:
    """The n x n Hankel matrix (moments[i + j]) of a length 2n-1 sequence."""
    count = len(moments)
    if count == 0 or count % 2 == 0:
        raise ValueError(
            f"Hankel moment sequence must have odd length 2n-1, got {count}"
        )
    n = (count + 1) // 2
    return RationalMatrix([[moments[i + j] for j in range(n)] for i in range(n)])


def _principal_records(
    matrix: RationalMatrix, leading_only: bool
) -> Iterator[_MinorRecord]:
    n = matrix.nrows
    array = None if matrix.is_exact else matrix.to_numpy()
    for k in range(1, n + 1):
        subsets = [tuple(range(k))] if leading_only else combinations(range(n), k)
        for idx in subsets:
            index = MinorIndex(idx, idx)
            if array is None:
                sub = [[matrix.rows[i][j] for j in idx] for i in idx]
                yield index, _bareiss(sub), 0.0  # type: ignore[arg-type]
            else:
                block = array[np.ix_(idx, idx)]
                yield index, _float_det(block), _hadamard(block)


def _definiteness(
    matrix: RationalMatrix, strict: bool, tol: float, row_offset: int, order: int
) -> Verdict:
    if matrix.is_exact:
        # Sylvester for PD; PSD needs every principal minor
        records = _principal_records(matrix, leading_only=strict)
        verdict = scan_minors(records, order, strict, 0.0)
    else:
        values = matrix.to_numpy()
        n = values.shape[0]
        scale = n * (float(np.max(np.abs(values))) or 1.0)
        lowest = float(np.linalg.eigvalsh(values)[0])
        threshold = tol * scale
        ok = lowest > threshold if strict else lowest >= -threshold
        ambiguous = _flips(lowest, scale, tol, strict)
        if ok:
            return Verdict(
                Status.TP if strict else Status.TN, order, tol, None, ambiguous, n
            )
        records = list(_principal_records(matrix, leading_only=False))
        verdict = scan_minors(records, order, strict, tol)
        if verdict.passed:
            # Spectrum fails but no single principal minor clears the gate
            worst = min(records, key=lambda r: float(r[1]))
            verdict = Verdict(
                Status.FAIL, order, tol, Witness(worst[0], worst[1]), True, len(records)
            )
    if verdict.witness is None:
        return verdict
    shifted = Witness(verdict.witness.index.shifted(row_offset=row_offset),
                      verdict.witness.value)
    return Verdict(
        Status.FAIL, order, verdict.tol, shifted, verdict.ambiguous, verdict.examined
    )


def hankel_check(
    moments: Sequence[Any], strict: bool = False, tol: float | None = None
) -> Verdict:
    """
    TN/TP test of a Hankel matrix from its moment sequence.

    The n x n Hankel matrix A is TN iff both A and A1 (A without its first
    row and last column) are positive semidefinite, and TP iff both are
    positive definite. Exact input uses principal-minor signs; float input
    uses the smallest eigenvalue against ``tol * n * max|entry|``.

    Witness indices refer to A itself.

    Raises:
        ValueError: If the sequence length is even.

    Example:
        >>> hankel_check([1, 0, 1, 0, 1]).witness.index
        MinorIndex(rows=(1, 2), cols=(0, 1))
    """
    full = hankel_matrix(moments)
    n = full.nrows
    tolerance = resolve_tol(full, tol)
    verdict = _definiteness(full, strict, tolerance, 0, n)
    if not verdict.passed or n == 1:
        return _warn_if_ambiguous(verdict)
    shifted = full.submatrix(range(1, n), range(n - 1))
    second = _definiteness(shifted, strict, tolerance, 1, n)
    merged = Verdict(
        second.status,
        n,
        tolerance,
        second.witness,
        verdict.ambiguous or second.ambiguous,
        verdict.examined + second.examined,
    )
    return _warn_if_ambiguous(merged)


def generalized_vandermonde(u: Sequence[Any], alpha: Sequence[Any]) -> RationalMatrix:
    """
    The matrix (u_i ** alpha_j).

    Exact when every u_i is rational and every alpha_j an integer.

    Raises:
        ValueError: Unless 0 < u_1 < u_2 < ... and alpha_1 < alpha_2 < ...
    """
    if not u or not alpha:
        raise ValueError("Nodes and exponents must be non-empty")
    if any(float(x) <= 0 for x in u):
        raise ValueError("Vandermonde nodes must be positive")
    for name, seq in (("nodes", u), ("exponents", alpha)):
        if any(a >= b for a, b in zip(seq, seq[1:], strict=False)):
            raise ValueError(f"Vandermonde {name} must be strictly increasing")
    integral = all(is_exact_value(a) and Fraction(a).denominator == 1 for a in alpha)
    if integral and all(is_exact_value(x) for x in u):
        nodes = [to_scalar(x, Kind.EXACT) for x in u]
        powers = [int(Fraction(a)) for a in alpha]
        return RationalMatrix([[x**a for a in powers] for x in nodes], Kind.EXACT)
    return RationalMatrix(
        [[float(x) ** float(a) for a in alpha] for x in u], Kind.FLOAT
    )


def toeplitz_matrix(
    f: Callable[[Any], Any], xs: Sequence[Any], ys: Sequence[Any]
) -> RationalMatrix:
    """The matrix (f(x_i - y_j)); kind inferred from the values of f."""
    return RationalMatrix([[f(x - y) for y in ys] for x in xs])


def sample_kernel(
    f: Callable[[float, float], Any], xs: Sequence[Any], ys: Sequence[Any]
) -> KernelGrid:
    """Sample a kernel on increasing grids."""
    return KernelGrid.from_function(f, xs, ys)


def check_kernel(
    grid: KernelGrid,
    p: int | None = None,
    strict: bool = False,
    tol: float | None = None,
) -> Verdict:
    """check() applied to the sampled values of a kernel."""
    return check(RationalMatrix.from_numpy(grid.values), p, strict, tol)
