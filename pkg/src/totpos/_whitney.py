"""
Discretized Gaussian convolution and the TP lift of TN_p kernels.

For kappa > 0 and node vectors z (rows) and w (columns) the convolution

    T(K)(x, y) = sum_j sum_k G(x, z_j) K(z_j, w_k) G(w_k, y),
    G(x, y) = exp(-kappa (x - y)**2)

keeps a kernel TN_p and makes it TP up to the rank r of K[z; w]. Adding
exp(-kappa) times the point mass at (z_1, w_1) between rounds raises the
rank by one each time, so after m = max(0, p - r) + 1 rounds the kernel

    K^(m) = T^m(K) + exp(-kappa) * sum_{j<m} T^j(delta_(z_1, w_1))

is TP_p. Both factors of every product are Gaussian matrices, so all
evaluations reduce to dense products against G, formed in row chunks.

The minors of K^(m) shrink like exp(-kappa * spread**2), far below float
resolution once kappa times the squared node spread passes a few units.
Verdicts therefore come from a float check only when it passes clearly;
otherwise K^(m) is re-evaluated in fixed point, every Gaussian entry
computed by mpmath to a bit width scaled to kappa * spread**2, and the
minors are checked exactly.

Example:
    >>> import numpy as np
    >>> from totpos import KernelGrid, ConvolutionPlan, lift_kernel
    >>> zero = KernelGrid((-1, 0, 1), (-1, 0, 1), np.zeros((3, 3)))
    >>> plan = ConvolutionPlan(1.0, zero.xs, zero.ys)
    >>> lift_kernel(zero, 2, plan).verdict.status.value
    'TP'
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Any

import mpmath
import numpy as np

from totpos._config import get_settings
from totpos._matrix import RationalMatrix, check, check_kernel
from totpos._serialization import verdict_to_dict
from totpos._types import KernelGrid, NotTotallyPositiveError, Verdict

__all__ = [
    "ConvolutionPlan",
    "LiftResult",
    "ApproxMode",
    "ApproxPoint",
    "ApproxReport",
    "GaussianProductIdentity",
    "gauss",
    "gauss_matrix",
    "numeric_rank",
    "lift_iterations",
    "convolve_step",
    "cauchy_binet_det",
    "lift_kernel",
    "tp_lift",
    "fc_nodes",
    "cc_nodes",
    "scaling_constant",
    "approximate",
    "gaussian_product_identity",
]

# Rows of a Gaussian block formed at once
_CHUNK = 512


def _require_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return kappa


def gauss(kappa: float, x: float, y: float) -> float:
    """
    The Gaussian kernel exp(-kappa (x - y)**2).

    Example:
        >>> gauss(1, 3, 3)
        1.0
    """
    kappa = _require_kappa(kappa)
    return math.exp(-kappa * (float(x) - float(y)) ** 2)


def gauss_matrix(kappa: float, xs: Sequence[float], ys: Sequence[float]) -> np.ndarray:
    """The matrix (G(x_i, y_j)); TP for increasing xs and ys."""
    kappa = _require_kappa(kappa)
    diff = np.subtract.outer(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
    return np.exp(-kappa * diff**2)


def _gauss_apply(
    kappa: float, rows: np.ndarray, nodes: np.ndarray, vectors: np.ndarray
) -> np.ndarray:
    """G(rows, nodes) @ vectors without forming the full Gaussian matrix."""
    out = np.empty((rows.shape[0], vectors.shape[1]))
    for start in range(0, rows.shape[0], _CHUNK):
        block = gauss_matrix(kappa, rows[start : start + _CHUNK], nodes)
        out[start : start + _CHUNK] = block @ vectors
    return out


def numeric_rank(values: np.ndarray, rtol: float | None = None) -> int:
    """Count singular values above ``rtol`` times the largest one."""
    rtol = get_settings().rank_rtol if rtol is None else rtol
    array = np.atleast_2d(np.asarray(values, dtype=float))
    if array.size == 0:
        return 0
    singular = np.linalg.svd(array, compute_uv=False)
    if singular[0] == 0:
        return 0
    return int(np.sum(singular > rtol * singular[0]))


def lift_iterations(rank: int, p: int) -> int:
    return max(0, p - rank) + 1


@dataclass(frozen=True)
class ConvolutionPlan:
    """Gaussian width and node vectors of one convolution.

    Attributes:
        kappa: Gaussian parameter, positive.
        z: Strictly increasing row nodes.
        w: Strictly increasing column nodes.
    """

    kappa: float
    z: tuple[float, ...]
    w: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kappa", _require_kappa(self.kappa))
        object.__setattr__(self, "z", tuple(float(v) for v in self.z))
        object.__setattr__(self, "w", tuple(float(v) for v in self.w))
        for name, nodes in (("z", self.z), ("w", self.w)):
            if not nodes:
                raise ValueError(f"Node vector {name} must be non-empty")
            if any(a >= b for a, b in zip(nodes, nodes[1:], strict=False)):
                raise ValueError(f"Node vector {name} must be strictly increasing")

    @property
    def perturbation_weight(self) -> float:
        return math.exp(-self.kappa)

    def require_order(self, p: int) -> None:
        if len(self.z) < p or len(self.w) < p:
            raise ValueError(
                f"Plan has {len(self.z)}x{len(self.w)} nodes, needs at least {p} each"
            )


def _node_block(grid: KernelGrid, plan: ConvolutionPlan) -> np.ndarray:
    rows = [grid.index_of(z, 0) for z in plan.z]
    cols = [grid.index_of(w, 1) for w in plan.w]
    return grid.values[np.ix_(rows, cols)]


def _lifted_values(
    kappa: float,
    z: np.ndarray,
    w: np.ndarray,
    block: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    iterations: int,
    with_delta: bool = True,
) -> np.ndarray:
    """K^(m) (or T^m(K) alone) at xs x ys from its node block K[z; w]."""
    # left[j] = G(xs, z) G(z, z)^j and right[j] = G(w, w)^j G(w, ys)
    left = [gauss_matrix(kappa, xs, z)]
    right = [gauss_matrix(kappa, w, ys)]
    for _ in range(iterations - 1):
        left.append(_gauss_apply(kappa, z, z, left[-1].T).T)
        right.append(_gauss_apply(kappa, w, w, right[-1]))
    values = left[-1] @ block @ right[-1]
    if with_delta:
        weight = math.exp(-kappa)
        for j in range(iterations - 1):
            values = values + weight * np.outer(left[j][:, 0], right[j][0, :])
    return values


# Doublings of the fixed-point width tried before a failing verdict stands
_PRECISION_ROUNDS = 3


def _spread(*coords: np.ndarray) -> float:
    values = np.concatenate([np.asarray(c, dtype=float).ravel() for c in coords])
    return float(values.max() - values.min())


def _working_bits(kappa: float, spread: float, count: int, m: int) -> int:
    """Starting fixed-point width for m Gaussian rounds over ``count`` nodes."""
    smallest = kappa * spread**2 / math.log(2)
    return 64 + math.ceil(smallest) + (m + 1) * max(count, 1).bit_length()


def _to_fixed(values: np.ndarray, bits: int) -> np.ndarray:
    """floor(values * 2**bits) as Python integers, exact for every float."""
    mant, exp = np.frexp(np.asarray(values, dtype=float))
    ints = (mant * 2.0**53).astype(np.int64).astype(object)
    shift = exp.astype(np.int64) + (bits - 53)
    up = np.maximum(shift, 0).astype(object)
    down = np.maximum(-shift, 0).astype(object)
    return (ints << up) >> down


def _uniform_step(points: list[Fraction]) -> Fraction | None:
    if len(points) < 2:
        return None
    step = points[1] - points[0]
    if all(p == points[0] + k * step for k, p in enumerate(points)):
        return step
    return None


def _gauss_fixed(kappa: float, a: np.ndarray, b: np.ndarray, bits: int) -> np.ndarray:
    """floor(G(a, b) * 2**bits), each distinct entry evaluated once by mpmath."""
    fa = [Fraction(float(v)) for v in a]
    fb = [Fraction(float(v)) for v in b]
    cache: dict[Fraction, int] = {}
    with mpmath.workprec(bits + 32):
        k = mpmath.mpf(float(kappa))

        def entry(diff: Fraction) -> int:
            diff = abs(diff)
            if diff not in cache:
                d = mpmath.mpf(diff.numerator) / diff.denominator
                cache[diff] = int(mpmath.ldexp(mpmath.exp(-k * d * d), bits))
            return cache[diff]

        step = _uniform_step(fa) if fa == fb else None
        if step is not None:
            # Toeplitz: one entry per index distance
            table = np.empty(len(fa), dtype=object)
            table[:] = [entry(i * step) for i in range(len(fa))]
            index = np.arange(len(fa))
            return table[np.abs(np.subtract.outer(index, index))]
        out = np.empty((len(fa), len(fb)), dtype=object)
        for i, x in enumerate(fa):
            out[i, :] = [entry(x - y) for y in fb]
        return out


def _lifted_fixed(
    kappa: float,
    z: np.ndarray,
    w: np.ndarray,
    block: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    iterations: int,
    bits: int,
) -> RationalMatrix:
    """K^(m) at xs x ys in fixed point with ``bits`` fractional bits."""
    unit = 1 << bits
    left = [_gauss_fixed(kappa, xs, z, bits)]
    right = [_gauss_fixed(kappa, w, ys, bits)]
    if iterations > 1:
        gzz = _gauss_fixed(kappa, z, z, bits)
        gww = _gauss_fixed(kappa, w, w, bits)
        for _ in range(iterations - 1):
            left.append((left[-1] @ gzz) // unit)
            right.append((gww @ right[-1]) // unit)
    inner = (left[-1] @ _to_fixed(block, bits)) // unit
    values = (inner @ right[-1]) // unit
    if iterations > 1:
        with mpmath.workprec(bits + 32):
            weight = int(mpmath.ldexp(mpmath.exp(-mpmath.mpf(float(kappa))), bits))
        for j in range(iterations - 1):
            outer = np.multiply.outer(left[j][:, 0], right[j][0, :]) // unit
            values = values + (weight * outer) // unit
    return RationalMatrix.exact(
        [[Fraction(int(v), unit) for v in row] for row in values]
    )


def _certify_lift(
    kappa: float,
    z: np.ndarray,
    w: np.ndarray,
    block: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    iterations: int,
    order: int,
    values: np.ndarray,
    tol: float | None = None,
) -> tuple[Verdict, int]:
    """
    Strict order-p verdict of K^(m) on xs x ys, and the fixed-point width used.

    A clear float pass stands (width 0). A float failure or an ambiguous
    pass is settled exactly on fixed-point values, doubling the width
    until the minors are positive or the rounds run out.
    """
    floats = RationalMatrix.from_numpy(values)
    verdict = check(floats, order, strict=True, tol=tol, warn=False)
    if verdict.passed and not verdict.ambiguous:
        return verdict, 0
    count = max(len(z), len(w))
    bits = _working_bits(kappa, _spread(z, w, xs, ys), count, iterations)
    for round_ in range(_PRECISION_ROUNDS):
        if round_:
            bits *= 2
        exact = _lifted_fixed(kappa, z, w, block, xs, ys, iterations, bits)
        verdict = check(exact, order, strict=True)
        if verdict.passed:
            break
    return verdict, bits


def convolve_step(
    grid: KernelGrid,
    plan: ConvolutionPlan,
    x: float,
    y: float,
    power: int = 1,
) -> float:
    """
    T^power(K)(x, y) for a sampled kernel.

    Raises:
        ValueError: If a plan node is not on the kernel's grid.

    Example:
        >>> import numpy as np
        >>> from totpos import KernelGrid
        >>> grid = KernelGrid((0, 1), (0, 1), np.zeros((2, 2)))
        >>> convolve_step(grid, ConvolutionPlan(1, (0, 1), (0, 1)), 0.5, 0.5)
        0.0
    """
    if power < 1:
        raise ValueError(f"power must be at least 1, got {power}")
    block = _node_block(grid, plan)
    values = _lifted_values(
        plan.kappa,
        np.asarray(plan.z),
        np.asarray(plan.w),
        block,
        np.array([float(x)]),
        np.array([float(y)]),
        power,
        with_delta=False,
    )
    return float(values[0, 0])


def cauchy_binet_det(
    grid: KernelGrid,
    plan: ConvolutionPlan,
    xs: Sequence[float],
    ys: Sequence[float],
) -> float:
    """
    det T(K)[xs; ys] expanded over the node minors.

    Sums det G[xs; z_J] det K[z_J; w_L] det G[w_L; ys] over increasing
    index tuples J, L of length len(xs), J before L.
    """
    if len(xs) != len(ys):
        raise ValueError(f"Need as many rows as columns, got {len(xs)} and {len(ys)}")
    block = _node_block(grid, plan)
    order = len(xs)
    left = gauss_matrix(plan.kappa, xs, plan.z)
    right = gauss_matrix(plan.kappa, plan.w, ys)
    total = 0.0
    for j in combinations(range(len(plan.z)), order):
        gx = float(np.linalg.det(left[:, j]))
        for k in combinations(range(len(plan.w)), order):
            inner = float(np.linalg.det(block[np.ix_(j, k)]))
            total += gx * inner * float(np.linalg.det(right[k, :]))
    return total


@dataclass(frozen=True)
class LiftResult:
    """Lifted kernel with the rank and round count that produced it.

    Attributes:
        grid: K^(m) sampled on the input grid, rounded to floats.
        rank: Numeric rank r of K[z; w].
        iterations: m = max(0, p - r) + 1.
        verdict: Strict check of K^(m) on the grid at order p.
        precision_bits: Fixed-point width the verdict was settled at, or 0
            when the float check was already conclusive.
    """

    grid: KernelGrid
    rank: int
    iterations: int
    verdict: Verdict
    precision_bits: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "rank": self.rank,
            "iterations": self.iterations,
            "xs": list(self.grid.xs),
            "ys": list(self.grid.ys),
            "values": self.grid.values.tolist(),
            "verdict": verdict_to_dict(self.verdict),
            "precision_bits": self.precision_bits,
        }


def lift_kernel(
    grid: KernelGrid, p: int, plan: ConvolutionPlan, tol: float | None = None
) -> LiftResult:
    """
    Lift a TN_p kernel to K^(m) and certify it on its own grid.

    Raises:
        NotTotallyPositiveError: If the sampled kernel is not TN_p.
        ValueError: If p is below 1 or the plan has fewer than p nodes.
    """
    if p < 1:
        raise ValueError(f"Order p must be positive, got {p}")
    plan.require_order(p)
    order = min(p, *grid.shape)
    verdict = check_kernel(grid, order, strict=False, tol=tol)
    if not verdict.passed:
        raise NotTotallyPositiveError(f"Kernel is not TN_{p} on its grid", verdict)
    block = _node_block(grid, plan)
    rank = numeric_rank(block)
    iterations = lift_iterations(rank, p)
    z, w = np.asarray(plan.z), np.asarray(plan.w)
    xs, ys = np.asarray(grid.xs, dtype=float), np.asarray(grid.ys, dtype=float)
    values = _lifted_values(plan.kappa, z, w, block, xs, ys, iterations)
    certified, bits = _certify_lift(
        plan.kappa, z, w, block, xs, ys, iterations, order, values, tol
    )
    lifted = KernelGrid(grid.xs, grid.ys, values)
    return LiftResult(lifted, rank, iterations, certified, bits)


def tp_lift(grid: KernelGrid, p: int, plan: ConvolutionPlan) -> KernelGrid:
    """
    K^(m) on the kernel's grid; see lift_kernel().

    Raises:
        NotTotallyPositiveError: If the input is not TN_p, or K^(m) cannot
            be certified TP_p at the widest fixed-point width tried.
    """
    result = lift_kernel(grid, p, plan)
    if not result.verdict.passed:
        raise NotTotallyPositiveError(
            f"Lifted kernel is not certified TP_{p} "
            f"at {result.precision_bits} fixed-point bits",
            result.verdict,
        )
    return result.grid


class ApproxMode(str, Enum):
    FC = "fc"
    CC = "cc"


def fc_nodes(n: int) -> np.ndarray:
    """(-n, -n + 2**-n, ..., n), N = n * 2**(n+1) + 1 nodes."""
    if n < 1:
        raise ValueError(f"Resolution n must be positive, got {n}")
    count = n * 2 ** (n + 1) + 1
    return -n + np.arange(count) / 2.0**n


def cc_nodes(n: int) -> np.ndarray:
    """Nodes of the continuum-continuum scheme, shared by rows and columns."""
    return fc_nodes(n)


def scaling_constant(mode: ApproxMode | str, m: int, n: int) -> float:
    """2**(-m n) (n/pi)**(m/2) for fc, 4**(-m n) (n/pi)**m for cc."""
    if ApproxMode(mode) is ApproxMode.FC:
        return 2.0 ** (-m * n) * (n / math.pi) ** (m / 2)
    return 4.0 ** (-m * n) * (n / math.pi) ** m


@dataclass(frozen=True)
class ApproxPoint:
    x: float
    y: float
    scaled: float
    target: float

    @property
    def error(self) -> float:
        return abs(self.scaled - self.target)


@dataclass(frozen=True)
class ApproxReport:
    """One resolution of a TP approximation scheme.

    Attributes:
        mode: fc (finite rows) or cc (continuum on both sides).
        n: Resolution; also the Gaussian parameter kappa.
        p: Target order.
        rank: Numeric rank of the kernel on the node grid.
        iterations: Lift rounds m.
        scale: Scaling constant applied to K^(m).
        points: Scaled value and target at each continuity point.
        verdict: Strict order-p check of the scaled kernel on the grid
            spanned by the continuity points.
        precision_bits: Fixed-point width the verdict was settled at, or 0
            when the float check was already conclusive.
    """

    mode: ApproxMode
    n: int
    p: int
    rank: int
    iterations: int
    scale: float
    points: tuple[ApproxPoint, ...]
    verdict: Verdict
    precision_bits: int = 0

    @property
    def max_error(self) -> float:
        return max(point.error for point in self.points)

    def csv_rows(self) -> list[list[Any]]:
        return [
            [pt.x, pt.y, self.n, pt.scaled, pt.target, pt.error] for pt in self.points
        ]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["x", "y", "n", "scaled", "target", "abs_error"])
        writer.writerows(self.csv_rows())
        return buffer.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "n": self.n,
            "p": self.p,
            "rank": self.rank,
            "iterations": self.iterations,
            "scale": self.scale,
            "max_error": self.max_error,
            "points": [
                {
                    "x": pt.x,
                    "y": pt.y,
                    "scaled": pt.scaled,
                    "target": pt.target,
                    "abs_error": pt.error,
                }
                for pt in self.points
            ],
            "verdict": verdict_to_dict(self.verdict),
            "precision_bits": self.precision_bits,
        }


def _sample(
    kernel: Callable[[float, float], Any], xs: np.ndarray, ys: np.ndarray
) -> np.ndarray:
    values = np.array([[float(kernel(x, y)) for y in ys] for x in xs])
    if not np.all(np.isfinite(values)):
        raise ValueError("Kernel must be bounded; got non-finite sample values")
    return values


def approximate(
    kernel: Callable[[float, float], Any],
    p: int,
    n: int,
    points: Sequence[tuple[float, float]],
    mode: ApproxMode | str = ApproxMode.FC,
    d: int | None = None,
) -> ApproxReport:
    """
    Scaled K^(m) at resolution n, compared with K at continuity points.

    In fc mode the kernel is defined on {1, ..., d} x R and row nodes are
    1..d; in cc mode both sides use the nodes of cc_nodes(n). kappa = n.
    The caller declares which points are continuity points; no claim is
    made elsewhere.

    Raises:
        ValueError: If n < p, n exceeds Settings.max_resolution, d is
            missing in fc mode, no points are given, or the kernel returns
            non-finite values.
    """
    mode = ApproxMode(mode)
    settings = get_settings()
    if p < 1:
        raise ValueError(f"Order p must be positive, got {p}")
    if n < p:
        raise ValueError(f"Resolution n={n} must be at least the order p={p}")
    if n > settings.max_resolution:
        raise ValueError(
            f"Resolution n={n} exceeds max_resolution={settings.max_resolution}"
        )
    if not points:
        raise ValueError("At least one continuity point is required")
    w = cc_nodes(n)
    if mode is ApproxMode.FC:
        if d is None or d < 1:
            raise ValueError("fc mode needs the size d of the finite factor")
        z = np.arange(1, d + 1, dtype=float)
    else:
        z = w
    block = _sample(kernel, z, w)
    rank = numeric_rank(block)
    iterations = lift_iterations(rank, p)
    xs = np.array(sorted({float(x) for x, _ in points}))
    ys = np.array(sorted({float(y) for _, y in points}))
    values = _lifted_values(float(n), z, w, block, xs, ys, iterations)
    scale = scaling_constant(mode, iterations, n)
    scaled = scale * values
    report_points = tuple(
        ApproxPoint(
            float(x),
            float(y),
            float(scaled[np.searchsorted(xs, float(x)), np.searchsorted(ys, float(y))]),
            float(kernel(x, y)),
        )
        for x, y in points
    )
    order = min(p, len(xs), len(ys))
    verdict, bits = _certify_lift(
        float(n), z, w, block, xs, ys, iterations, order, scaled
    )
    return ApproxReport(
        mode, n, p, rank, iterations, scale, report_points, verdict, bits
    )


@dataclass(frozen=True)
class GaussianProductIdentity:
    """Both sides of a product of Gaussians written as one multivariate Gaussian.

    Attributes:
        mu: x_0 repeated m times.
        V: 2 kappa Q_m, Q_m tridiagonal with diagonal (2, ..., 2, 1) and
            off-diagonal -1.
        lhs: prod_j G(x_{j-1}, x_j).
        rhs: exp(-kappa x_0**2) g_{mu,V}(x_1, ..., x_m).
    """

    mu: np.ndarray
    V: np.ndarray
    lhs: float
    rhs: float

    @property
    def relative_error(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return 0.0 if scale == 0 else abs(self.lhs - self.rhs) / scale


def gaussian_product_identity(
    kappa: float, xs: Sequence[float]
) -> GaussianProductIdentity:
    """
    Evaluate a chain of Gaussians directly and in multivariate form.

    g_{mu,V}(x) = exp(-x^T V x / 2 + x^T V mu), so det V = (2 kappa)**m.

    Raises:
        ValueError: If fewer than two points are given or kappa <= 0.

    Example:
        >>> identity = gaussian_product_identity(1.0, [0.0, 0.5, 1.0, -0.2])
        >>> round(float(np.linalg.det(identity.V)), 9)
        8.0
    """
    kappa = _require_kappa(kappa)
    points = np.asarray(xs, dtype=float)
    m = len(points) - 1
    if m < 1:
        raise ValueError("Need at least two points x_0, x_1")
    q = 2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
    q[-1, -1] = 1
    v = 2 * kappa * q
    mu = np.full(m, points[0])
    pairs = zip(points, points[1:], strict=False)
    lhs = math.prod(gauss(kappa, a, b) for a, b in pairs)
    tail = points[1:]
    exponent = -0.5 * tail @ v @ tail + tail @ v @ mu - kappa * points[0] ** 2
    return GaussianProductIdentity(mu, v, lhs, math.exp(float(exponent)))
