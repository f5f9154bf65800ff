"""
Counterexample families and the fixed-dimension preserver experiments.

Each family is a parametrized TN matrix used to rule out entrywise
transforms:

    A2(x, y), B2(x, y)     rank-one 2x2 matrices      (x, y >= 0)
    SYM2(x, y)             [[x, sqrt(xy)], [sqrt(xy), y]]
    MONO2(x, y)            [[y, x], [x, y]]            (y >= x >= 0)
    C3                     tridiagonal with 1/sqrt(2) off-diagonals
    APRIME3, BPRIME3       symmetric rank-one 3x3      (x >= 0, y > 0)
    N4(eps, x)             ones(4) + x * M(eps)        (0 < eps < 1, x > 0)
    MOMENT(x, n)           (1 + x**(i+j)), i, j < n    (0 < x < 1)
    T5(x)                  ones(5) + x * H             (x >= 0)

test_power_preserver() applies c * x**alpha to every family relevant to a
dimension and reports either PASS (grid-relative) or a refuting witness,
together with the bucket predicted by the classification theorems:

    >>> report = test_power_preserver(0.5, 1, 3)
    >>> report.outcome.value, report.witness.family.value
    ('REFUTED', 'C3')
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

import mpmath
import numpy as np

from totpos._config import get_settings
from totpos._matrix import RationalMatrix, check
from totpos._scalar import Kind, format_scalar, is_exact_value, to_scalar
from totpos._serialization import verdict_to_dict
from totpos._transform import (
    Atom,
    Constant,
    Power,
    Step,
    TransformSpec,
    apply_entrywise,
)
from totpos._types import Verdict

__all__ = [
    "FamilyId",
    "Bucket",
    "Outcome",
    "FamilyWitness",
    "PreserverReport",
    "PRESERVER_TOL",
    "make_family",
    "family_grid",
    "families_for",
    "sample_grid",
    "search_counterexample",
    "test_preserver",
    "test_power_preserver",
    "expected_verdict",
    "refutation_covered",
    "n4_expansion",
    "n4_power_det",
    "report_to_dict",
]

# Float gate for preserver searches; the moment-matrix witnesses at
# alpha in (1, 2) sit about 4e-9 * H below zero.
PRESERVER_TOL = 1e-10

_PERTURBATION_WEIGHTS = (Fraction(1, 100), Fraction(1, 1000))

_T5_BASE = (
    (2, 3, 6, 14, 36),
    (3, 6, 14, 36, 98),
    (6, 14, 36, 98, 276),
    (14, 36, 98, 284, 842),
    (36, 98, 276, 842, 2604),
)


class FamilyId(str, Enum):
    A2 = "A2"
    B2 = "B2"
    SYM2 = "SYM2"
    MONO2 = "MONO2"
    C3 = "C3"
    APRIME3 = "APRIME3"
    BPRIME3 = "BPRIME3"
    N4 = "N4"
    MOMENT = "MOMENT"
    T5 = "T5"


class Bucket(str, Enum):
    """Classification predicted by the preserver theorems."""

    PRESERVES = "PRESERVES"
    FAILS = "FAILS"


class Outcome(str, Enum):
    """Empirical result of a grid search; PASS is grid-relative."""

    PASS = "PASS"
    REFUTED = "REFUTED"


def _num(value: Any) -> Fraction | float:
    if is_exact_value(value):
        return to_scalar(value, Kind.EXACT)
    return float(value)


def _exact_sqrt(value: Fraction | float) -> Fraction | float:
    if isinstance(value, Fraction) and value >= 0:
        num, den = math.isqrt(value.numerator), math.isqrt(value.denominator)
        if num * num == value.numerator and den * den == value.denominator:
            return Fraction(num, den)
    return math.sqrt(float(value))


def _kind_of(*values: Any) -> Kind:
    return Kind.EXACT if all(isinstance(v, Fraction) for v in values) else Kind.FLOAT


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


def _a2(x: Any, y: Any) -> RationalMatrix:
    x, y = _num(x), _num(y)
    _require(x >= 0 and y >= 0, f"A2 needs x, y >= 0, got ({x}, {y})")
    return RationalMatrix([[x, x * y], [1, y]], _kind_of(x, y))


def _b2(x: Any, y: Any) -> RationalMatrix:
    x, y = _num(x), _num(y)
    _require(x >= 0 and y >= 0, f"B2 needs x, y >= 0, got ({x}, {y})")
    return RationalMatrix([[x * y, x], [y, 1]], _kind_of(x, y))


def _sym2(x: Any, y: Any) -> RationalMatrix:
    x, y = _num(x), _num(y)
    _require(x >= 0 and y >= 0, f"SYM2 needs x, y >= 0, got ({x}, {y})")
    root = _exact_sqrt(x * y)
    return RationalMatrix([[x, root], [root, y]], _kind_of(x, y, root))


def _mono2(x: Any, y: Any) -> RationalMatrix:
    x, y = _num(x), _num(y)
    _require(y >= x >= 0, f"MONO2 needs y >= x >= 0, got ({x}, {y})")
    return RationalMatrix([[y, x], [x, y]], _kind_of(x, y))


def _c3() -> RationalMatrix:
    r = math.sqrt(0.5)
    return RationalMatrix([[1.0, r, 0.0], [r, 1.0, r], [0.0, r, 1.0]], Kind.FLOAT)


def _aprime3(x: Any, y: Any) -> RationalMatrix:
    x, y = _num(x), _num(y)
    _require(x >= 0 and y > 0, f"APRIME3 needs x >= 0, y > 0, got ({x}, {y})")
    rows = [[x * x, x, x * y], [x, 1, y], [x * y, y, y * y]]
    return RationalMatrix(rows, _kind_of(x, y))


def _bprime3(x: Any, y: Any) -> RationalMatrix:
    x, y = _num(x), _num(y)
    _require(x >= 0 and y > 0, f"BPRIME3 needs x >= 0, y > 0, got ({x}, {y})")
    rows = [[x * x * y, x * y, x], [x * y, y, 1], [x, 1, 1 / y]]
    return RationalMatrix(rows, _kind_of(x, y))


def _n4_perturbation(eps: Fraction | float) -> list[list[Any]]:
    half = Fraction(1, 2) if isinstance(eps, Fraction) else 0.5
    return [
        [0, 0, 0, 0],
        [0, 1, 2, 3],
        [0, 2, 4 + eps, 6 + 5 * half * eps],
        [0, 3, 8, 14 + eps],
    ]


def _n4(eps: Any, x: Any) -> RationalMatrix:
    eps, x = _num(eps), _num(x)
    _require(0 < eps < 1, f"N4 needs 0 < eps < 1, got {eps}")
    _require(x > 0, f"N4 needs x > 0, got {x}")
    rows = [[1 + x * m for m in row] for row in _n4_perturbation(eps)]
    return RationalMatrix(rows, _kind_of(eps, x))


def _moment(x: Any, n: Any = 4) -> RationalMatrix:
    x = _num(x)
    n = int(n)
    _require(0 < x < 1, f"MOMENT needs 0 < x < 1, got {x}")
    _require(n >= 1, f"MOMENT needs n >= 1, got {n}")
    rows = [[1 + x ** (i + j) for j in range(n)] for i in range(n)]
    return RationalMatrix(rows, _kind_of(x))


def _t5(x: Any) -> RationalMatrix:
    x = _num(x)
    _require(x >= 0, f"T5 needs x >= 0, got {x}")
    rows = [[1 + x * h for h in row] for row in _T5_BASE]
    return RationalMatrix(rows, _kind_of(x))


_BUILDERS = {
    FamilyId.A2: _a2,
    FamilyId.B2: _b2,
    FamilyId.SYM2: _sym2,
    FamilyId.MONO2: _mono2,
    FamilyId.C3: _c3,
    FamilyId.APRIME3: _aprime3,
    FamilyId.BPRIME3: _bprime3,
    FamilyId.N4: _n4,
    FamilyId.MOMENT: _moment,
    FamilyId.T5: _t5,
}

# MOMENT is built at n = d, from d = 4 on
_FAMILY_SIZE = {
    FamilyId.A2: 2,
    FamilyId.B2: 2,
    FamilyId.SYM2: 2,
    FamilyId.MONO2: 2,
    FamilyId.C3: 3,
    FamilyId.APRIME3: 3,
    FamilyId.BPRIME3: 3,
    FamilyId.N4: 4,
    FamilyId.MOMENT: 4,
    FamilyId.T5: 5,
}

_SYMMETRIC = (
    FamilyId.SYM2,
    FamilyId.MONO2,
    FamilyId.C3,
    FamilyId.APRIME3,
    FamilyId.BPRIME3,
    FamilyId.MOMENT,
    FamilyId.T5,
)


def make_family(family: FamilyId | str, *params: Any) -> RationalMatrix:
    """
    Build a family matrix.

    Exact whenever the parameters are rational (C3 is always float, SYM2
    only when x*y is a rational square).

    Raises:
        ValueError: On an unknown family or parameters outside its range.

    Example:
        >>> make_family("A2", 2, 3).rows
        ((Fraction(2, 1), Fraction(6, 1)), (Fraction(1, 1), Fraction(3, 1)))
    """
    try:
        builder = _BUILDERS[FamilyId(family)]
    except ValueError:
        raise ValueError(f"Unknown family {family!r}") from None
    try:
        return builder(*params)
    except TypeError:
        raise ValueError(f"Wrong number of parameters for {family}: {params}") from None


def _log_grid(points: int = 25, low_exp: int = -4) -> list[Fraction]:
    """Log-spaced values over [10**low_exp, 1) rounded to 3 significant digits."""
    values = []
    for k in range(points):
        value = 10 ** (low_exp + (-low_exp) * k / points)
        values.append(Fraction(f"{value:.3g}"))
    return sorted(set(values))


def family_grid(family: FamilyId | str, d: int = 4) -> list[tuple[Any, ...]]:
    """
    Default parameter grid of a family, in lexicographic order.

    MOMENT is truncated at n = d.
    """
    family = FamilyId(family)
    quarter = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2),
               Fraction(4)]
    if family in (FamilyId.A2, FamilyId.B2, FamilyId.SYM2):
        return [(x, y) for x in quarter for y in quarter]
    if family is FamilyId.MONO2:
        return [(x, y) for x in quarter for y in quarter if x < y]
    if family is FamilyId.C3:
        return [()]
    if family in (FamilyId.APRIME3, FamilyId.BPRIME3):
        xs = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)]
        ys = [Fraction(1, 2), Fraction(1), Fraction(2)]
        return [(x, y) for x in xs for y in ys]
    if family is FamilyId.N4:
        axis = _log_grid()
        return [(eps, x) for eps in axis for x in axis]
    if family is FamilyId.MOMENT:
        return [(Fraction(k, 10), d) for k in range(1, 10)]
    return sorted(
        (Fraction(m, 10**k),) for k in range(1, 9) for m in (1, 2, 5)
    )


def families_for(d: int, symmetric: bool = False) -> list[FamilyId]:
    """Families of size at most d, in search order."""
    return [
        family
        for family in FamilyId
        if _FAMILY_SIZE[family] <= d and (not symmetric or family in _SYMMETRIC)
    ]


def sample_grid(
    grid: Sequence[tuple[Any, ...]], count: int, seed: int | Sequence[int] = 0
) -> list[tuple[Any, ...]]:
    """
    The grid plus count random points on segments between grid points.

    Every family's parameter domain is convex, so the samples are valid
    parameters. Weights are multiples of 1/16, keeping exact grids exact.

    Example:
        >>> len(sample_grid([(0, 1), (2, 3)], 4, seed=7))
        6
    """
    if count < 0:
        raise ValueError(f"Sample count must be non-negative, got {count}")
    points = list(grid)
    if count == 0 or not points:
        return points
    rng = np.random.default_rng(seed)
    for _ in range(count):
        a = points[int(rng.integers(len(grid)))]
        b = points[int(rng.integers(len(grid)))]
        t = Fraction(int(rng.integers(1, 16)), 16)
        points.append(tuple(t * u + (1 - t) * v for u, v in zip(a, b, strict=True)))
    return points


@dataclass(frozen=True)
class FamilyWitness:
    """A family point whose transformed matrix fails the sign test.

    Attributes:
        family: Family that produced the matrix.
        params: Grid point.
        verdict: Failing verdict of the transformed matrix.
        perturbation: Weight t of the added Gaussian matrix (strict runs).
        matrix: The transformed matrix, kept for re-checking.
    """

    family: FamilyId
    params: tuple[Any, ...]
    verdict: Verdict
    perturbation: Fraction | None = None
    matrix: RationalMatrix | None = field(default=None, compare=False, repr=False)

    def source_matrix(self) -> RationalMatrix:
        """The family matrix (plus perturbation) before the transform."""
        base = make_family(self.family, *self.params)
        if self.perturbation is None:
            return base
        return base + _gauss_perturbation(base.nrows, self.perturbation)

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family.value,
            "params": [format_scalar(_num(p)) for p in self.params],
            "perturbation": (
                None if self.perturbation is None else str(self.perturbation)
            ),
            "verdict": verdict_to_dict(self.verdict),
        }


@dataclass(frozen=True)
class PreserverReport:
    """Outcome of a preserver experiment.

    Attributes:
        transform: The transform applied entrywise.
        dimension: Matrix dimension d.
        symmetric: Whether only symmetric families were used.
        strict: TP (True) or TN (False) classification.
        expected: Bucket predicted by the classification, if known.
        outcome: PASS (no violation on the grid) or REFUTED.
        witness: Refuting family point when REFUTED.
        covered: Whether the implemented families can refute this case.
        points: Grid points evaluated.
    """

    transform: TransformSpec
    dimension: int
    symmetric: bool
    strict: bool
    expected: Bucket | None
    outcome: Outcome
    witness: FamilyWitness | None = None
    covered: bool = False
    points: int = 0

    @property
    def consistent(self) -> bool:
        if self.expected is None:
            return True
        if self.outcome is Outcome.REFUTED:
            return self.expected is Bucket.FAILS
        return self.expected is Bucket.PRESERVES or not self.covered


def _gauss_perturbation(n: int, weight: Fraction) -> RationalMatrix:
    # 2**-(i-j)**2 is the Gaussian kernel exp(-log(2) (i-j)^2), hence TP
    rows = [[weight / 2 ** ((i - j) ** 2) for j in range(n)] for i in range(n)]
    return RationalMatrix(rows, Kind.EXACT)


def _tp_source(
    base: RationalMatrix, tol: float
) -> tuple[RationalMatrix, Fraction | None] | None:
    gate = 0.0 if base.is_exact else tol
    if check(base, strict=True, tol=gate, warn=False).passed:
        return base, None
    for weight in _PERTURBATION_WEIGHTS:
        candidate = base + _gauss_perturbation(base.nrows, weight)
        gate = 0.0 if candidate.is_exact else tol
        if check(candidate, strict=True, tol=gate, warn=False).passed:
            return candidate, weight
    return None


def _evaluate(
    transform: TransformSpec,
    family: FamilyId,
    params: tuple[Any, ...],
    strict: bool,
    tol: float,
) -> FamilyWitness | None:
    try:
        base = make_family(family, *params)
    except ValueError:
        return None
    weight = None
    if strict:
        source = _tp_source(base, tol)
        if source is None:
            return None
        base, weight = source
    try:
        image = apply_entrywise(base, transform)
    except ValueError:
        return None
    gate = 0.0 if image.is_exact else tol
    verdict = check(image, strict=strict, tol=gate, warn=False)
    if verdict.passed:
        return None
    return FamilyWitness(family, tuple(params), verdict, weight, image)


def _chunks(items: Sequence[Any], size: int) -> Iterator[Sequence[Any]]:
    for start in range(0, len(items), size):
        yield items[start : start + size]


def _search(
    transform: TransformSpec,
    family: FamilyId,
    grid: Sequence[tuple[Any, ...]],
    strict: bool,
    tol: float,
) -> tuple[FamilyWitness | None, int]:
    points = sorted(grid, key=lambda p: tuple(float(v) for v in p))
    threads = get_settings().threads
    if threads <= 1 or len(points) < 2:
        for count, params in enumerate(points, start=1):
            found = _evaluate(transform, family, params, strict, tol)
            if found is not None:
                return found, count
        return None, len(points)
    count = 0
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for chunk in _chunks(points, threads * 4):
            results = list(
                pool.map(lambda p: _evaluate(transform, family, p, strict, tol), chunk)
            )
            for offset, found in enumerate(results, start=1):
                if found is not None:
                    return found, count + offset
            count += len(chunk)
    return None, count


def search_counterexample(
    transform: TransformSpec,
    family: FamilyId | str,
    grid: Sequence[tuple[Any, ...]] | None = None,
    strict: bool = False,
    tol: float = PRESERVER_TOL,
    d: int = 4,
) -> FamilyWitness | None:
    """
    First grid point whose transformed family matrix fails the sign test.

    Points are visited in lexicographic order; with TOTPOS_THREADS > 1 the
    search runs in a thread pool and still returns the lexicographically
    first failure. Points outside the family's range or the transform's
    domain are skipped. Strict searches only use points whose matrix
    (perturbed by t * (2**-(i-j)**2) if needed) is certified TP.

    Example:
        >>> search_counterexample(Power(2), "T5").family.value
        'T5'
    """
    family = FamilyId(family)
    points = family_grid(family, d) if grid is None else list(grid)
    found, _count = _search(transform, family, points, strict, tol)
    return found


def _classify(
    transform: TransformSpec, d: int, symmetric: bool, strict: bool
) -> Bucket | None:
    if isinstance(transform, Power):
        return expected_verdict(transform.alpha, d, symmetric, strict)
    if isinstance(transform, Constant):
        if strict:
            return Bucket.PRESERVES if d == 1 and transform.c > 0 else Bucket.FAILS
        return Bucket.PRESERVES if transform.c >= 0 else Bucket.FAILS
    if isinstance(transform, Step) and not strict:
        return Bucket.PRESERVES if d <= 2 and transform.c >= 0 else Bucket.FAILS
    if isinstance(transform, Atom) and not strict:
        return Bucket.PRESERVES if d == 1 and transform.c >= 0 else Bucket.FAILS
    return None


def test_preserver(
    transform: TransformSpec,
    d: int,
    symmetric: bool = False,
    strict: bool = False,
    grids: Mapping[FamilyId | str, Sequence[tuple[Any, ...]]] | None = None,
    tol: float = PRESERVER_TOL,
    samples: int = 0,
    seed: int = 0,
) -> PreserverReport:
    """
    Run every family relevant to (d, symmetric) through a transform.

    Args:
        transform: Entrywise transform under test.
        d: Matrix dimension, 2..5.
        symmetric: Restrict to symmetric families.
        strict: Test TP preservation on Gaussian-perturbed matrices.
        grids: Per-family parameter grids replacing the defaults.
        tol: Float gate for the sign test.
        samples: Random extra points per family, see ``sample_grid``.
        seed: Seed for those points; each family draws from (seed, family).

    Raises:
        ValueError: If d is outside 2..5 or samples is negative.
    """
    if not 2 <= d <= 5:
        raise ValueError(f"Dimension must be in 2..5, got {d}")
    overrides = {FamilyId(k): list(v) for k, v in (grids or {}).items()}
    total = 0
    witness = None
    for family in families_for(d, symmetric):
        grid = overrides.get(family, family_grid(family, d))
        grid = sample_grid(grid, samples, (seed, list(FamilyId).index(family)))
        witness, count = _search(transform, family, grid, strict, tol)
        total += count
        if witness is not None:
            break
    covered = False
    if isinstance(transform, Power):
        covered = refutation_covered(transform.alpha, d, symmetric, strict)
    return PreserverReport(
        transform=transform,
        dimension=d,
        symmetric=symmetric,
        strict=strict,
        expected=_classify(transform, d, symmetric, strict),
        outcome=Outcome.PASS if witness is None else Outcome.REFUTED,
        witness=witness,
        covered=covered,
        points=total,
    )


test_preserver.__test__ = False  # type: ignore[attr-defined]


def test_power_preserver(
    alpha: Any,
    c: Any = 1,
    d: int = 3,
    symmetric: bool = False,
    grid: Mapping[FamilyId | str, Sequence[tuple[Any, ...]]] | None = None,
    strict: bool = False,
    tol: float = PRESERVER_TOL,
) -> PreserverReport:
    """
    Experiment for F(x) = c * x**alpha on d x d (symmetric) matrices.

    Example:
        >>> test_power_preserver(1.5, 1, 3).outcome.value
        'PASS'
    """
    return test_preserver(Power(alpha, c), d, symmetric, strict, grid, tol)


test_power_preserver.__test__ = False  # type: ignore[attr-defined]


def expected_verdict(
    alpha: Any, d: int, symmetric: bool = False, strict: bool = False
) -> Bucket:
    """
    Bucket of x**alpha in the fixed-dimension classification tables.

    TN (lax): alpha = 0 is the constant 1 and always preserves; otherwise
    d = 1 needs alpha >= 0, d = 2 alpha > 0, d = 3 alpha >= 1, d = 4 alpha = 1
    (or alpha >= 2 for symmetric matrices) and d >= 5 alpha = 1.
    TP (strict): the same, except that d = 1 admits every alpha and alpha = 0
    fails from d = 2 on.

    Example:
        >>> expected_verdict(2, 4, symmetric=True).value
        'PRESERVES'
    """
    a = float(alpha)
    if d < 1:
        raise ValueError(f"Dimension must be positive, got {d}")
    if d == 1:
        return Bucket.PRESERVES if strict or a >= 0 else Bucket.FAILS
    if a == 0:
        return Bucket.FAILS if strict else Bucket.PRESERVES
    if d == 2:
        ok = a > 0
    elif d == 3:
        ok = a >= 1
    elif d == 4:
        ok = a == 1 or (symmetric and a >= 2)
    else:
        ok = a == 1
    return Bucket.PRESERVES if ok else Bucket.FAILS


def refutation_covered(
    alpha: Any, d: int, symmetric: bool = False, strict: bool = False
) -> bool:
    """True if the default families are expected to refute x**alpha here."""
    a = float(alpha)
    integral = a.is_integer()
    if strict:
        return (d >= 2 and a <= 0) or (d >= 3 and 0 < a < 1)
    if d >= 2 and a < 0:
        return True
    if d >= 3 and 0 < a < 1:
        return True
    if not symmetric and d >= 4 and a > 1:
        return True
    if symmetric and d >= 4 and 1 < a < 2:
        return True
    return symmetric and d >= 5 and a >= 2 and integral


def n4_expansion(eps: Any, x: Any, alpha: Any) -> float:
    """Leading terms of det N(eps, x)**alpha for small x."""
    e, t, a = float(eps), float(x), float(alpha)
    cubic = e**2 * a**3 * t**3
    quartic = 0.25 * (8 - 70 * e - 59 * e**2 - 4 * e**3) * (a**3 - a**4) * t**4
    return cubic + quartic


def n4_power_det(eps: Any, x: Any, alpha: Any, dps: int = 60) -> mpmath.mpf:
    """det N(eps, x)**alpha evaluated at ``dps`` decimal digits."""
    with mpmath.workdps(dps):
        e = _mp(eps)
        t = _mp(x)
        a = _mp(alpha)
        rows = [[(1 + t * _mp(m)) ** a for m in row] for row in _n4_perturbation(e)]
        return mpmath.det(mpmath.matrix(rows))


def _mp(value: Any) -> mpmath.mpf:
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    if isinstance(value, str) and is_exact_value(value):
        frac = Fraction(value)
        return mpmath.mpf(frac.numerator) / frac.denominator
    return mpmath.mpf(value)


def report_to_dict(report: PreserverReport) -> dict[str, Any]:
    return {
        "transform": report.transform.to_dict(),
        "dimension": report.dimension,
        "symmetric": report.symmetric,
        "strict": report.strict,
        "expected": None if report.expected is None else report.expected.value,
        "outcome": report.outcome.value,
        "grid_relative": report.outcome is Outcome.PASS,
        "covered": report.covered,
        "consistent": report.consistent,
        "points": report.points,
        "witness": None if report.witness is None else report.witness.to_dict(),
    }
