"""
TP completions of 2x2 matrices.

Every TP 2x2 matrix A equals lambda**-1 * (exp(alpha_i * beta_j)) with
alpha_1 < alpha_2 and beta_1 < beta_2, so it sits inside the TP kernel
lambda**-1 * exp(x y) and, after affine reparametrizations of both axes,
inside a positive multiple of a generalized Vandermonde matrix of any
size. A symmetric TP 2x2 matrix [[a, b], [b, c]] likewise sits inside the
continuous Hankel kernel a * exp(alpha s**2 + beta s), s = x + y.

Example:
    >>> from totpos import RationalMatrix, embed_tp_2x2
    >>> emb = embed_tp_2x2(RationalMatrix.exact([[3, 1], [1, 1]]), 4, 4)
    >>> emb.case, round(emb.lam, 12)
    ('A1', 1.0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from totpos._config import get_settings
from totpos._matrix import RationalMatrix, check, fekete_tp
from totpos._scalar import Kind
from totpos._types import KernelGrid, NotTotallyPositiveError, Verdict

__all__ = [
    "VandermondeEmbedding",
    "HankelEmbedding",
    "embed_tp_2x2",
    "embed_sym_2x2",
    "exact_copy",
]


def exact_copy(matrix: RationalMatrix) -> RationalMatrix:
    """The same matrix with every float entry read as an exact binary fraction."""
    if matrix.is_exact:
        return matrix
    return RationalMatrix(
        [[Fraction(v) for v in row] for row in matrix.rows], Kind.EXACT
    )


def _affine(p1: float, p2: float, v1: float, v2: float) -> tuple[float, float]:
    slope = (v2 - v1) / (p2 - p1)
    return slope, v1 - slope * p1


def _exp(value: float) -> float:
    try:
        return math.exp(value)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class VandermondeEmbedding:
    """A TP 2x2 matrix placed inside lambda**-1 * exp(phi_X(x) * phi_Y(y)).

    Attributes:
        log_lam: log lambda; lambda itself can overflow a float.
        alpha: Row coordinates (alpha_1 < alpha_2), alpha_i = log u_i.
        beta: Column exponents (beta_1 < beta_2).
        shape: Size (m, n) of the materialized matrix.
        rows: Placement rows i_1 < i_2 (0-based).
        cols: Placement columns j_1 < j_2 (0-based).
        case: Branch that produced the parameters, "A1".."A8" or "generic".
        flipped: Whether both coordinate pairs were negated to make them
            increasing.
    """

    log_lam: float
    alpha: tuple[float, float]
    beta: tuple[float, float]
    shape: tuple[int, int]
    rows: tuple[int, int]
    cols: tuple[int, int]
    case: str
    flipped: bool = False

    @property
    def lam(self) -> float:
        """lambda, or inf when it exceeds the float range."""
        return _exp(self.log_lam)

    @property
    def row_map(self) -> tuple[float, float]:
        """(slope, intercept) of phi_X, with phi_X(i_k) = alpha_k."""
        return _affine(*self.rows, *self.alpha)

    @property
    def col_map(self) -> tuple[float, float]:
        """(slope, intercept) of phi_Y, with phi_Y(j_k) = beta_k."""
        return _affine(*self.cols, *self.beta)

    @property
    def nodes(self) -> tuple[float, ...]:
        """u_i = exp(phi_X(i)) for every row of the materialized matrix."""
        slope, intercept = self.row_map
        return tuple(_exp(slope * i + intercept) for i in range(self.shape[0]))

    @property
    def exponents(self) -> tuple[float, ...]:
        slope, intercept = self.col_map
        return tuple(slope * j + intercept for j in range(self.shape[1]))

    def kernel(self, x: float, y: float) -> float:
        rx, ix = self.row_map
        ry, iy = self.col_map
        return math.exp((rx * x + ix) * (ry * y + iy) - self.log_lam)

    def matrix(self) -> RationalMatrix:
        """The m x n matrix lambda**-1 * (u_i ** beta_j)."""
        m, n = self.shape
        return RationalMatrix(
            [[self.kernel(i, j) for j in range(n)] for i in range(m)], Kind.FLOAT
        )

    def certify(self) -> Verdict:
        """Fekete TP certificate of the materialized matrix, in exact arithmetic."""
        return fekete_tp(exact_copy(self.matrix()))

    def to_dict(self) -> dict[str, Any]:
        return {
            "case": self.case,
            "log_lambda": self.log_lam,
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "flipped": self.flipped,
            "shape": list(self.shape),
            "rows": list(self.rows),
            "cols": list(self.cols),
            "row_map": list(self.row_map),
            "col_map": list(self.col_map),
        }


def _equal(a: float, b: float, exact: bool) -> bool:
    if exact:
        return a == b
    return math.isclose(a, b, rel_tol=get_settings().equal_rtol, abs_tol=0.0)


def _scaled_vandermonde(
    v: float, w: float, x: float, y: float, exact: bool
) -> tuple[str, float, tuple[float, float], tuple[float, float]]:
    """(case, log lambda, log u, exponents), A = lambda**-1 (u_i ** exponent_j)."""
    def eq(a: float, b: float) -> bool:
        return _equal(a, b, exact)

    lv, lw, lx, ly = (math.log(t) for t in (v, w, x, y))
    # three equal entries: A = c * A_k
    if eq(w, x) and eq(x, y):
        return "A1", -ly, (lv - ly, 0.0), (1.0, 0.0)
    if eq(v, x) and eq(x, y):
        return "A2", -lv, (lw - lv, 0.0), (0.0, 1.0)
    if eq(v, w) and eq(w, y):
        return "A3", -lv, (0.0, lx - lv), (1.0, 0.0)
    if eq(v, w) and eq(w, x):
        return "A4", -lv, (0.0, ly - lv), (0.0, 1.0)
    # two equal entries in a row or column
    if eq(v, w):
        return "A5", -lv, (0.0, lx - lv), (1.0, (ly - lv) / (lx - lv))
    if eq(x, y):
        return "A6", -lx, (lv - lx, 0.0), (1.0, (lw - lx) / (lv - lx))
    if eq(w, y):
        return "A7", -lw, (lv - lw, lx - lw), (1.0, 0.0)
    if eq(v, x):
        return "A8", -lv, (lw - lv, ly - lv), (0.0, 1.0)
    log_lam = (lw * lx - lv * ly) / (lv + ly - lw - lx)
    exps = (1.0, (lw - ly) / (lv - lx))
    return "generic", log_lam, (log_lam + lv, log_lam + lx), exps


def _placement(indices: tuple[int, int], size: int, axis: str) -> tuple[int, int]:
    first, second = (int(k) for k in indices)
    if not 0 <= first < second < size:
        raise ValueError(
            f"Placement {axis} {indices} must satisfy 0 <= i1 < i2 < {size}"
        )
    return first, second


def _require_tp(matrix: RationalMatrix, symmetric: bool = False) -> None:
    if matrix.shape != (2, 2):
        raise ValueError(f"Expected a 2x2 matrix, got {matrix.nrows}x{matrix.ncols}")
    if symmetric and not matrix.is_symmetric(get_settings().equal_rtol):
        raise ValueError("Expected a symmetric 2x2 matrix")
    verdict = check(matrix, 2, strict=True, warn=False)
    if not verdict.passed:
        raise NotTotallyPositiveError("Input 2x2 matrix is not TP", verdict)


def embed_tp_2x2(
    matrix: RationalMatrix,
    m: int = 2,
    n: int = 2,
    rows: tuple[int, int] = (0, 1),
    cols: tuple[int, int] = (0, 1),
) -> VandermondeEmbedding:
    """
    Embed a TP 2x2 matrix into an m x n multiple of a generalized Vandermonde.

    The placed rows and columns get the coordinates of the 2x2 solution;
    the remaining ones extend them on uniform arithmetic grids.

    Args:
        matrix: TP 2x2 input.
        m: Rows of the target matrix, at least 2.
        n: Columns of the target matrix, at least 2.
        rows: Target rows (0-based) receiving the input rows.
        cols: Target columns (0-based) receiving the input columns.

    Raises:
        NotTotallyPositiveError: If the input is not TP.
        ValueError: On a non-2x2 input or an invalid placement.

    Example:
        >>> emb = embed_tp_2x2(RationalMatrix.floats([[1, 2], [3, 7]]), 5, 7,
        ...                    (1, 3), (2, 5))
        >>> emb.certify().status.value
        'TP'
    """
    _require_tp(matrix)
    if m < 2 or n < 2:
        raise ValueError(f"Target shape must be at least 2x2, got {m}x{n}")
    placed_rows = _placement(rows, m, "rows")
    placed_cols = _placement(cols, n, "cols")
    v, w = (float(t) for t in matrix.rows[0])
    x, y = (float(t) for t in matrix.rows[1])
    case, log_lam, alpha, beta = _scaled_vandermonde(v, w, x, y, matrix.is_exact)
    flipped = alpha[0] > alpha[1]
    if flipped:
        alpha = (-alpha[0], -alpha[1])
        beta = (-beta[0], -beta[1])
    return VandermondeEmbedding(
        log_lam, alpha, beta, (m, n), placed_rows, placed_cols, case, flipped
    )


@dataclass(frozen=True)
class HankelEmbedding:
    """The kernel K(x, y) = a * exp(alpha s**2 + beta s), s = phi(x) + phi(y).

    phi is the affine map with phi(x1) = 0 and phi(x2) = 1, so that
    K[(x1, x2); (x1, x2)] is the embedded matrix.

    Attributes:
        a: Positive scale, the (1, 1) entry.
        alpha: Quadratic coefficient, 1/2 log(ac / b**2) > 0.
        beta: Linear coefficient, 1/2 log(b**4 / (a**3 c)).
        x1: First placement point.
        x2: Second placement point, x2 > x1.
    """

    a: float
    alpha: float
    beta: float
    x1: float = 0.0
    x2: float = 1.0

    def phi(self, t: float) -> float:
        return (float(t) - self.x1) / (self.x2 - self.x1)

    def __call__(self, x: float, y: float) -> float:
        s = self.phi(x) + self.phi(y)
        return self.a * math.exp(self.alpha * s * s + self.beta * s)

    def grid(self, points: Any) -> KernelGrid:
        """Sample the kernel on points x points."""
        return KernelGrid.from_function(self, points, points)

    def certify(self, points: Any) -> Verdict:
        """Exact strict check of the sampled grid."""
        values = self.grid(points).values
        return check(exact_copy(RationalMatrix.from_numpy(values)), strict=True)

    def to_dict(self) -> dict[str, Any]:
        return {
            "a": self.a,
            "alpha": self.alpha,
            "beta": self.beta,
            "x1": self.x1,
            "x2": self.x2,
        }


def embed_sym_2x2(
    matrix: RationalMatrix, x1: float = 0.0, x2: float = 1.0
) -> HankelEmbedding:
    """
    Embed a symmetric TP 2x2 matrix into a TP continuous Hankel kernel.

    Raises:
        NotTotallyPositiveError: If the input is not TP.
        ValueError: If the input is not symmetric 2x2 or x1 >= x2.

    Example:
        >>> emb = embed_sym_2x2(RationalMatrix.exact([[2, 1], [1, 2]]))
        >>> round(emb(0, 1), 12), round(emb(1, 1), 12)
        (1.0, 2.0)
    """
    _require_tp(matrix, symmetric=True)
    if not float(x1) < float(x2):
        raise ValueError(f"Placement needs x1 < x2, got ({x1}, {x2})")
    a, b = (float(t) for t in matrix.rows[0])
    c = float(matrix.rows[1][1])
    alpha = 0.5 * math.log(a * c / (b * b))
    beta = 0.5 * math.log(b**4 / (a**3 * c))
    return HankelEmbedding(a, alpha, beta, float(x1), float(x2))
