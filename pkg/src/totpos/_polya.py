"""
Polya frequency functions and sequences.

A Polya frequency function (PFF) is an integrable f >= 0, non-zero at two
or more points, whose Toeplitz kernel (x, y) -> f(x - y) is TN. The
families here are the standard test set:

- LambdaD(d):        e^{-x} on x > 0, d at the origin, 0 on x < 0
- Phi():             x e^{-x} on x >= 0
- GaussDensity(g):   exp(-x**2 / 4g) / (2 sqrt(pi g))
- MAlpha(a):         (a+1) e^{-a|x|} - a e^{-(a+1)|x|}
- OneSidedN(a1, a2, a3, c): c1 e^{-a1 x} + c2 e^{-a2 x} + c3 e^{-a3 x}, x >= 0
- ExpPolyDensity(f): any one-sided or even exponential polynomial

Every family but the Gaussian has a rational bilateral Laplace transform.
power_obstruction() expands f**n into partial fractions p_n / q_n and
certifies that q_n / p_n is not a polynomial, so f**n is not a PFF.

Example:
    >>> from totpos import MAlpha, power_obstruction
    >>> power_obstruction(MAlpha(1), 2).verdict.value
    'OBSTRUCTED'
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Any

import mpmath
import numpy as np
import sympy

from totpos._config import get_settings
from totpos._laplace import (
    S,
    ExpPoly,
    ExpTerm,
    RationalFunction,
    laplace_exp_poly,
    strip_of_convergence,
    to_sympy_number,
)
from totpos._matrix import (
    RationalMatrix,
    check,
    contiguous_check,
    det,
    resolve_tol,
    toeplitz_matrix,
)
from totpos._scalar import Kind, Scalar, format_scalar, infer_kind, to_scalar
from totpos._serialization import matrix_to_dict, verdict_to_dict, witness_to_dict
from totpos._transform import Atom
from totpos._types import (
    DegenerateExponentsError,
    KernelGrid,
    MinorIndex,
    Status,
    Verdict,
    Witness,
)

__all__ = [
    "PffFamily",
    "LambdaD",
    "Phi",
    "GaussDensity",
    "MAlpha",
    "OneSidedN",
    "ExpPolyDensity",
    "eval_pff",
    "laplace",
    "PowerVerdict",
    "PowerObstruction",
    "power_obstruction",
    "PfSequence",
    "pf_sequence_check",
    "RootCertificate",
    "generating_poly_pf_check",
    "discretize_pff",
    "pff_toeplitz_check",
    "JainResult",
    "cosine_jain",
    "moment_hankel",
    "pfseq_origin_determinants",
    "SequenceWitness",
    "toeplitz_power_witness",
    "atom_sequence_witness",
    "transform_report",
]

# Coefficients below this fraction of the largest one are float noise.
_TRIM_RTOL = 1e-9


def _fmt(value: sympy.Expr) -> str | float:
    return str(value) if value.is_Rational else float(value)


class PffFamily(ABC):
    """A named Polya frequency function."""

    name: str = ""

    @abstractmethod
    def __call__(self, x: float) -> float: ...

    @abstractmethod
    def params(self) -> dict[str, Any]: ...

    def exp_poly(self) -> ExpPoly:
        """The family as an exponential polynomial.

        Raises:
            ValueError: If the family is not an exponential polynomial.
        """
        raise ValueError(
            f"{self.name} has no rational Laplace transform "
            "(it is not an exponential polynomial)"
        )

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.name, **self.params()}


@dataclass(frozen=True)
class LambdaD(PffFamily):
    """e^{-x} 1_{x > 0} with the value d in [0, 1] at the origin."""

    d: Any = 1
    name = "lambda"

    def __post_init__(self) -> None:
        object.__setattr__(self, "d", to_sympy_number(self.d))
        if not 0 <= self.d <= 1:
            raise ValueError(f"lambda_d needs d in [0, 1], got {self.d}")

    def __call__(self, x: float) -> float:
        x = float(x)
        if x < 0:
            return 0.0
        if x == 0:
            return float(self.d)
        return math.exp(-x)

    def params(self) -> dict[str, Any]:
        return {"d": _fmt(self.d)}

    def exp_poly(self) -> ExpPoly:
        return ExpPoly((ExpTerm(1, 1),))


@dataclass(frozen=True)
class Phi(PffFamily):
    """x e^{-x} on x >= 0."""

    name = "phi"

    def __call__(self, x: float) -> float:
        x = float(x)
        return x * math.exp(-x) if x > 0 else 0.0

    def params(self) -> dict[str, Any]:
        return {}

    def exp_poly(self) -> ExpPoly:
        return ExpPoly((ExpTerm(1, 1, power=1),))


@dataclass(frozen=True)
class GaussDensity(PffFamily):
    """The heat kernel g_gamma(x) = exp(-x**2 / 4 gamma) / (2 sqrt(pi gamma))."""

    gamma: float = 1.0
    name = "gauss"

    def __post_init__(self) -> None:
        if not float(self.gamma) > 0:
            raise ValueError(f"Gaussian density needs gamma > 0, got {self.gamma}")

    def __call__(self, x: float) -> float:
        g = float(self.gamma)
        return math.exp(-float(x) ** 2 / (4 * g)) / (2 * math.sqrt(math.pi * g))

    def params(self) -> dict[str, Any]:
        return {"gamma": float(self.gamma)}


@dataclass(frozen=True)
class MAlpha(PffFamily):
    """
    (alpha + 1) e^{-alpha |x|} - alpha e^{-(alpha + 1) |x|}.

    Even, positive and unimodal with M(0) = 1. Its Laplace transform is
    2 alpha (alpha+1)(2 alpha+1) / ((s**2 - alpha**2)(s**2 - (alpha+1)**2)),
    yet no integer power M**n with n >= 2 is a PFF.
    """

    alpha: Any = 1
    name = "M"

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", to_sympy_number(self.alpha))
        if not self.alpha > 0:
            raise ValueError(f"M_alpha needs alpha > 0, got {self.alpha}")

    def __call__(self, x: float) -> float:
        a = float(self.alpha)
        t = abs(float(x))
        return (a + 1) * math.exp(-a * t) - a * math.exp(-(a + 1) * t)

    def params(self) -> dict[str, Any]:
        return {"alpha": _fmt(self.alpha)}

    def exp_poly(self) -> ExpPoly:
        a = self.alpha
        return ExpPoly((ExpTerm(a + 1, a), ExpTerm(-a, a + 1)), even=True)


@dataclass(frozen=True)
class OneSidedN(PffFamily):
    """
    c1 e^{-a1 x} + c2 e^{-a2 x} + c3 e^{-a3 x} on x >= 0, zero on x < 0.

    The coefficients must satisfy c1 > 0, c1 + c2 + c3 = 0 and
    a1 c1 + a2 c2 + a3 c3 = 0, which fixes them up to a positive scale;
    when omitted they default to (a3 - a2, -(a3 - a1), a2 - a1).

    Rational exponents stay exact. Irrational ones (sympy expressions such
    as ``sympy.sqrt(2)``) are carried as floats.

    Raises:
        ValueError: Unless 0 < a1 < a2 < a3 and the constraints hold.
    """

    a: tuple[Any, Any, Any]
    c: tuple[Any, Any, Any] | None = None
    name = "N"

    def __post_init__(self) -> None:
        if len(self.a) != 3:
            raise ValueError(f"OneSidedN needs three exponents, got {len(self.a)}")
        a1, a2, a3 = (to_sympy_number(v) for v in self.a)
        if not 0 < a1 < a2 < a3:
            raise ValueError(f"Exponents must satisfy 0 < a1 < a2 < a3, got {self.a}")
        object.__setattr__(self, "a", (a1, a2, a3))
        if self.c is None:
            c = (a3 - a2, -(a3 - a1), a2 - a1)
        else:
            if len(self.c) != 3:
                raise ValueError("OneSidedN needs three coefficients")
            c = tuple(to_sympy_number(v) for v in self.c)
        object.__setattr__(self, "c", c)
        self._check_constraints()

    def _check_constraints(self) -> None:
        c1, c2, c3 = self.coeffs
        a1, a2, a3 = self.a
        if not c1 > 0:
            raise ValueError(f"OneSidedN needs c1 > 0, got {c1}")
        total = c1 + c2 + c3
        moment = a1 * c1 + a2 * c2 + a3 * c3
        scale = float(abs(c1) + abs(c2) + abs(c3)) * float(a3)
        exact = all(v.is_Rational for v in (*self.a, *self.coeffs))
        for label, value in (("c1 + c2 + c3", total), ("a.c", moment)):
            off = value != 0 if exact else abs(float(value)) > _TRIM_RTOL * scale
            if off:
                raise ValueError(f"OneSidedN constraint {label} = 0 fails: {value}")

    @property
    def coeffs(self) -> tuple[sympy.Expr, sympy.Expr, sympy.Expr]:
        assert self.c is not None
        return self.c  # type: ignore[return-value]

    def __call__(self, x: float) -> float:
        x = float(x)
        if x < 0:
            return 0.0
        return self.exp_poly()(x)

    def params(self) -> dict[str, Any]:
        return {
            "a": [_fmt(v) for v in self.a],
            "c": [_fmt(v) for v in self.coeffs],
        }

    def exp_poly(self) -> ExpPoly:
        return ExpPoly(
            tuple(ExpTerm(c, a) for c, a in zip(self.coeffs, self.a, strict=True))
        )


@dataclass(frozen=True)
class ExpPolyDensity(PffFamily):
    """Wrapper turning any ExpPoly into a family."""

    poly: ExpPoly
    name = "exppoly"

    def __call__(self, x: float) -> float:
        return self.poly(x)

    def params(self) -> dict[str, Any]:
        return {
            "even": self.poly.even,
            "terms": [
                {"coeff": _fmt(t.coeff), "rate": _fmt(t.rate), "power": t.power}
                for t in self.poly.terms
            ],
        }

    def exp_poly(self) -> ExpPoly:
        return self.poly


def eval_pff(f: PffFamily, x: float) -> float:
    """Pointwise value; one-sided families vanish left of the origin."""
    return f(x)


def laplace(f: PffFamily) -> RationalFunction:
    """
    Bilateral Laplace transform of an exponential-polynomial family.

    Raises:
        ValueError: For the Gaussian, whose transform is not rational.

    Example:
        >>> str(laplace(LambdaD()).denominator.as_expr())
        's + 1'
    """
    return laplace_exp_poly(f.exp_poly())


class PowerVerdict(str, Enum):
    COMPATIBLE = "COMPATIBLE"
    OBSTRUCTED = "OBSTRUCTED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class PowerObstruction:
    """Partial-fraction certificate for the n-th power of a family.

    Attributes:
        family: The family that was raised to the power.
        n: The power.
        transform: B{f**n} = p_n / q_n.
        verdict: COMPATIBLE when p_n divides q_n; OBSTRUCTED when p_n is
            non-constant and non-zero at every root of q_n.
        root_values: (root of q_n, p_n(root)) for every root.
        endpoint_ratio: p_n at the root of the largest exponent sum over p_n
            at the root of the smallest; it differs from 1 only when p_n is
            non-constant.
    """

    family: PffFamily
    n: int
    transform: RationalFunction
    verdict: PowerVerdict
    root_values: tuple[tuple[Any, Any], ...] = field(repr=False)
    endpoint_ratio: Any = None

    @property
    def numerator(self) -> sympy.Poly:
        return self.transform.numerator

    @property
    def denominator(self) -> sympy.Poly:
        return self.transform.denominator

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family.to_dict(),
            "n": self.n,
            "verdict": self.verdict.value,
            "numerator_degree": self.numerator.degree(),
            "denominator_degree": self.denominator.degree(),
            "transform": self.transform.to_dict(),
            "endpoint_ratio": _fmt(to_sympy_number(self.endpoint_ratio)),
            "root_values": [
                [_fmt(to_sympy_number(r)), _fmt(to_sympy_number(v))]
                for r, v in self.root_values
            ],
        }


def _compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Tuples of `parts` non-negative integers summing to n, lexicographic."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, parts - 1):
            yield (first, *rest)


def _multinomial(ks: Sequence[int]) -> int:
    out = math.factorial(sum(ks))
    for k in ks:
        out //= math.factorial(k)
    return out


def _power_terms(
    poly: ExpPoly, n: int
) -> list[tuple[sympy.Expr, sympy.Expr]]:
    """(weight, rate) pairs of f**n, rejecting coincident rates."""
    coeffs = [t.coeff for t in poly.terms]
    rates = [t.rate for t in poly.terms]
    out = []
    for ks in _compositions(n, len(poly.terms)):
        weight = sympy.Integer(_multinomial(ks))
        for c, k in zip(coeffs, ks, strict=True):
            weight *= c**k
        rate = sum((k * a for k, a in zip(ks, rates, strict=True)), sympy.Integer(0))
        out.append((weight, rate))
    ordered = sorted(out, key=lambda pair: float(pair[1]))
    for (_, r1), (_, r2) in zip(ordered, ordered[1:], strict=False):
        same = r1 == r2 if poly.exact else math.isclose(
            float(r1), float(r2), rel_tol=_TRIM_RTOL
        )
        if same:
            raise DegenerateExponentsError(
                f"Exponent sums coincide at {_fmt(r1)} for power {n}; "
                "the exponents are rationally dependent"
            )
    return out


def _trim(poly: sympy.Poly) -> sympy.Poly:
    coeffs = [float(c) for c in poly.all_coeffs()]
    top = max((abs(c) for c in coeffs), default=0.0)
    kept = [0.0 if abs(c) <= _TRIM_RTOL * top else c for c in coeffs]
    return sympy.Poly(kept, S, domain=sympy.RR)


def _nonzero(poly: sympy.Poly, root: Any, value: Any, exact: bool) -> bool:
    if exact:
        return value != 0
    coeffs = [abs(float(c)) for c in poly.all_coeffs()]
    scale = sum(coeffs) * max(1.0, abs(float(root))) ** max(poly.degree(), 0)
    return abs(float(value)) > _TRIM_RTOL * scale


def power_obstruction(f: PffFamily, n: int) -> PowerObstruction:
    """
    Decide whether the Laplace transform of f**n has a polynomial reciprocal.

    f**n = sum_m w_m e^{-r_m x} (one-sided) or e^{-r_m |x|} (even) by the
    multinomial theorem. Over the common denominator

        one-sided:  q_n = prod (s + r_m),        p_n = sum w_m prod_{m' != m}
        even:       q_n = prod (s**2 - r_m**2),  p_n = sum -2 r_m w_m prod ...

    so p_n(root of factor m) is w_m times a product of non-zero differences,
    and a non-constant p_n cannot divide q_n.

    Args:
        f: An exponential-polynomial family without polynomial factors,
            typically MAlpha or OneSidedN.
        n: Power, at least 1.

    Raises:
        ValueError: If n < 1 or f has x**k factors or no rational transform.
        DegenerateExponentsError: If two exponent sums coincide.

    Example:
        >>> power_obstruction(MAlpha(1), 1).verdict.value
        'COMPATIBLE'
    """
    if n < 1:
        raise ValueError(f"Power must be at least 1, got {n}")
    poly = f.exp_poly()
    if any(t.power for t in poly.terms):
        raise ValueError("power_obstruction needs terms without x**k factors")
    exact = poly.exact
    domain = sympy.QQ if exact else sympy.RR
    pairs = _power_terms(poly, n)
    if poly.even:
        factors = [sympy.Poly(S**2 - r**2, S, domain=domain) for _, r in pairs]
        weights = [-2 * r * w for w, r in pairs]
    else:
        factors = [sympy.Poly(S + r, S, domain=domain) for _, r in pairs]
        weights = [w for w, _ in pairs]
    count = len(factors)
    one = sympy.Poly(1, S, domain=domain)
    prefix = [one]
    for fac in factors:
        prefix.append(prefix[-1] * fac)
    suffix = [one]
    for fac in reversed(factors):
        suffix.append(suffix[-1] * fac)
    suffix.reverse()
    numerator = sympy.Poly(0, S, domain=domain)
    for m, w in enumerate(weights):
        numerator += (prefix[m] * suffix[m + 1]).mul_ground(w)
    if not exact:
        numerator = _trim(numerator)
    transform = RationalFunction(numerator.as_expr(), prefix[count].as_expr(), exact)
    p = transform.numerator

    roots: list[Any] = []
    for _, r in pairs:
        roots.extend((r, -r) if poly.even else (-r,))
    root_values = tuple((root, p.eval(root)) for root in roots)
    ordered = sorted(pairs, key=lambda pair: float(pair[1]))
    low, high = ordered[0][1], ordered[-1][1]
    at_low = p.eval(low if poly.even else -low)
    at_high = p.eval(high if poly.even else -high)
    ratio = at_high / at_low if at_low != 0 else sympy.oo

    if transform.is_polynomial_reciprocal():
        verdict = PowerVerdict.COMPATIBLE
    elif p.degree() >= 1 and all(
        _nonzero(p, root, value, exact) for root, value in root_values
    ):
        verdict = PowerVerdict.OBSTRUCTED
    else:
        verdict = PowerVerdict.INCONCLUSIVE
    return PowerObstruction(f, n, transform, verdict, root_values, ratio)


@dataclass(frozen=True)
class PfSequence:
    """A finitely supported sequence a_offset, a_{offset+1}, ...

    Attributes:
        offset: Index of the first listed coefficient.
        coeffs: Consecutive terms; every other index holds 0.
    """

    offset: int
    coeffs: tuple[Scalar, ...]

    def __post_init__(self) -> None:
        values = tuple(self.coeffs)
        kind = infer_kind(values)
        coerced = tuple(to_scalar(v, kind) for v in values)
        if not any(coerced):
            raise ValueError("A PF sequence needs at least one non-zero term")
        object.__setattr__(self, "coeffs", coerced)
        object.__setattr__(self, "offset", int(self.offset))

    @property
    def kind(self) -> Kind:
        return Kind.EXACT if isinstance(self.coeffs[0], Fraction) else Kind.FLOAT

    @property
    def support(self) -> tuple[int, int]:
        return self.offset, self.offset + len(self.coeffs) - 1

    def __getitem__(self, index: int) -> Scalar:
        k = index - self.offset
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self.coeffs[0] * 0

    def toeplitz(self, size: int) -> RationalMatrix:
        """The size x size section (a_{i - j + offset}) of the Toeplitz kernel."""
        return RationalMatrix(
            [[self[i - j + self.offset] for j in range(size)] for i in range(size)],
            self.kind,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "offset": self.offset,
            "coeffs": [format_scalar(v) for v in self.coeffs],
        }


def pf_sequence_check(
    seq: PfSequence, p: int = 4, window: int | None = None, tol: float | None = None
) -> Verdict:
    """
    Lax TN_p check of the Toeplitz section of a PF-sequence candidate.

    Args:
        seq: The sequence.
        p: Largest minor order.
        window: Side of the Toeplitz section; defaults to len(coeffs) + 2p,
            which places every order-p minor touching the support inside.

    Example:
        >>> pf_sequence_check(PfSequence(0, (1, 0, 1)), 2).status.value
        'FAIL'
    """
    size = len(seq.coeffs) + 2 * p if window is None else window
    if size < p:
        raise ValueError(f"Window {size} is smaller than the order {p}")
    return check(seq.toeplitz(size), p, strict=False, tol=tol)


@dataclass(frozen=True)
class RootCertificate:
    """Sturm certificate that a generating polynomial has only real roots <= 0.

    Attributes:
        passed: All roots real and non-positive with positive coefficients.
        degree: Degree of the polynomial.
        zero_multiplicity: Multiplicity of the root 0 (the z**k factor).
        negative_roots: Negative real roots counted with multiplicity.
        positive_coeffs: Whether the coefficients of the z**k-free part
            are all positive.
    """

    passed: bool
    degree: int
    zero_multiplicity: int
    negative_roots: int
    positive_coeffs: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "degree": self.degree,
            "zero_multiplicity": self.zero_multiplicity,
            "negative_roots": self.negative_roots,
            "positive_coeffs": self.positive_coeffs,
        }


def _sign_changes(values: Sequence[Any]) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:], strict=False) if a != b)


def _negative_root_count(factor: sympy.Poly) -> int:
    """Distinct roots of a square-free factor in (-B, 0), B its Cauchy bound."""
    coeffs = factor.all_coeffs()
    bound = 1 + max(abs(c / coeffs[0]) for c in coeffs[1:]) if len(coeffs) > 1 else 1
    chain = sympy.sturm(factor)
    left = _sign_changes([g.eval(-bound) for g in chain])
    right = _sign_changes([g.eval(0) for g in chain])
    return left - right


def generating_poly_pf_check(coeffs: Sequence[Any]) -> RootCertificate:
    """
    Certify a_0 + a_1 z + ... + a_d z**d has only real, non-positive roots.

    The sequence (a_k) with positive coefficients is then a one-sided PF
    sequence. Roots are counted per square-free factor with Sturm chains
    over the rationals.

    Args:
        coeffs: Ascending coefficients; ints, Fractions or "p/q" strings.

    Raises:
        ValueError: If every coefficient is zero or one is not rational.

    Example:
        >>> generating_poly_pf_check([1, 2, 1]).passed
        True
        >>> generating_poly_pf_check([1, 1, 1]).passed
        False
    """
    values = [to_scalar(c, Kind.EXACT) for c in coeffs]
    if not any(values):
        raise ValueError("The generating polynomial must be non-zero")
    z = sympy.Symbol("z")
    low = next(k for k, v in enumerate(values) if v)
    high = max(k for k, v in enumerate(values) if v)
    core = [sympy.Rational(v.numerator, v.denominator) for v in values[low : high + 1]]
    poly = sympy.Poly(list(reversed(core)), z, domain=sympy.QQ)
    positive = all(c > 0 for c in core)
    negative = 0
    for factor, multiplicity in poly.sqf_list()[1]:
        if factor.degree() > 0:
            negative += multiplicity * _negative_root_count(factor)
    degree = poly.degree()
    return RootCertificate(
        passed=positive and negative == degree,
        degree=high,
        zero_multiplicity=low,
        negative_roots=negative,
        positive_coeffs=positive,
    )


def discretize_pff(
    f: Callable[[float], float],
    N: int,
    window: tuple[int, int] = (-8, 8),
    power: int = 1,
) -> PfSequence:
    """
    The sequence (f(n / N) ** power) for n in the closed window.

    Example:
        >>> discretize_pff(LambdaD(), 1, (-2, 0)).coeffs
        (0.0, 0.0, 1.0)
    """
    if N < 1:
        raise ValueError(f"Discretization step N must be at least 1, got {N}")
    lo, hi = window
    if lo > hi:
        raise ValueError(f"Empty window {window}")
    return PfSequence(lo, tuple(f(n / N) ** power for n in range(lo, hi + 1)))


def pff_toeplitz_check(
    f: Callable[[float], float],
    xs: Sequence[float],
    p: int | None = None,
    strict: bool = False,
    tol: float | None = None,
) -> Verdict:
    """check() on the sampled Toeplitz matrix (f(x_i - x_j))."""
    points = [float(x) for x in xs]
    if any(a >= b for a, b in zip(points, points[1:], strict=False)):
        raise ValueError("Sample points must be strictly increasing")
    matrix = toeplitz_matrix(lambda t: float(f(t)), points, points)
    return check(matrix, p, strict, tol)


@dataclass(frozen=True)
class JainResult:
    """Hadamard power of the cosine matrix (cos((i - j) theta)).

    Attributes:
        n: Size.
        theta: Angle, 0 < theta < pi / (2n - 2).
        alpha: Entrywise power.
        base: The cosine matrix A itself.
        powered: A with every entry raised to alpha.
        min_eigenvalue: Smallest eigenvalue of the powered matrix.
        psd: Whether the powered matrix is positive semidefinite.
        tn: TN verdict of the powered matrix.
        base_verdict: TN_3 verdict of A (higher minors vanish by rank 2).
        rank2_residual: Largest |3 x 3 minor| of A.
        det2_residual: Largest gap between a 2 x 2 minor of A and the
            product of sines it equals.
    """

    n: int
    theta: float
    alpha: float
    base: RationalMatrix
    powered: RationalMatrix
    min_eigenvalue: float
    psd: bool
    tn: Verdict
    base_verdict: Verdict
    rank2_residual: float
    det2_residual: float

    @property
    def expected_psd(self) -> bool:
        """PSD holds exactly for alpha in {0, 1, 2, ...} or alpha >= n - 2."""
        if self.alpha >= self.n - 2:
            return True
        return float(self.alpha).is_integer()

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "theta": self.theta,
            "alpha": self.alpha,
            "psd": self.psd,
            "expected_psd": self.expected_psd,
            "min_eigenvalue": self.min_eigenvalue,
            "tn": verdict_to_dict(self.tn),
            "base_tn": verdict_to_dict(self.base_verdict),
            "rank2_residual": self.rank2_residual,
            "det2_residual": self.det2_residual,
            "matrix": matrix_to_dict(self.powered),
        }


def _worst_principal_minor(values: Any, n: int) -> Witness:
    worst: tuple[MinorIndex, Any] | None = None
    for k in range(1, n + 1):
        for idx in combinations(range(n), k):
            block = mpmath.matrix([[values[i, j] for j in idx] for i in idx])
            value = mpmath.det(block)
            if worst is None or value < worst[1]:
                worst = (MinorIndex(idx, idx), value)
    assert worst is not None
    return Witness(worst[0], float(worst[1]))


def cosine_jain(n: int, theta: float, alpha: float, dps: int = 50) -> JainResult:
    """
    Positive semidefiniteness and TN of (cos((i - j) theta) ** alpha).

    The eigenvalue decision uses mpmath at `dps` digits and the gate
    min eigenvalue >= -psd_rtol * n * max|entry|. A failing PSD test
    yields a principal-minor witness, which also refutes TN.

    Raises:
        ValueError: If n < 2, theta is outside (0, pi / (2n - 2)) or
            alpha < 0.

    Example:
        >>> cosine_jain(5, math.pi / 10, 3).psd
        True
    """
    if n < 2:
        raise ValueError(f"Size must be at least 2, got {n}")
    theta = float(theta)
    if not 0 < theta < math.pi / (2 * n - 2):
        raise ValueError(f"theta must lie in (0, pi/{2 * n - 2}), got {theta}")
    alpha = float(alpha)
    if alpha < 0:
        raise ValueError(f"Power must be non-negative, got {alpha}")
    settings = get_settings()
    with mpmath.workdps(dps):
        th = mpmath.mpf(theta)
        exact_powered = mpmath.matrix(
            [[mpmath.cos((i - j) * th) ** alpha for j in range(n)] for i in range(n)]
        )
        eigenvalues, _ = mpmath.eigsy(exact_powered)
        lowest = min(eigenvalues[i] for i in range(n))
        psd = lowest >= -settings.psd_rtol * n
        witness = None if psd else _worst_principal_minor(exact_powered, n)
    base = RationalMatrix(
        [[math.cos((i - j) * theta) for j in range(n)] for i in range(n)], Kind.FLOAT
    )
    powered = RationalMatrix(
        [[math.cos((i - j) * theta) ** alpha for j in range(n)] for i in range(n)],
        Kind.FLOAT,
    )
    if witness is None:
        tn = check(powered, strict=False, warn=False)
    else:
        tn = Verdict(Status.FAIL, n, resolve_tol(powered, None), witness)
    array = base.to_numpy()
    rank2 = max(
        (
            abs(float(np.linalg.det(array[np.ix_(r, c)])))
            for r in combinations(range(n), 3)
            for c in combinations(range(n), 3)
        ),
        default=0.0,
    )
    det2 = max(
        abs(
            float(np.linalg.det(array[np.ix_(r, c)]))
            - math.sin((r[1] - r[0]) * theta) * math.sin((c[1] - c[0]) * theta)
        )
        for r in combinations(range(n), 2)
        for c in combinations(range(n), 2)
    )
    base_verdict = check(base, min(n, 3), warn=False)
    return JainResult(
        n, theta, alpha, base, powered, float(lowest), bool(psd), tn,
        base_verdict, rank2, det2,
    )


def moment_hankel(
    atoms: Sequence[float], weights: Sequence[float], grid: Sequence[float]
) -> KernelGrid:
    """
    The moment kernel K(x, y) = sum_k c_k u_k ** (x + y) of a finite measure.

    TN on any grid, with rank at most the number of atoms.

    Raises:
        ValueError: Unless atoms are distinct and positive, weights positive
            and both lists equally long.
    """
    us = [float(u) for u in atoms]
    cs = [float(c) for c in weights]
    if not us or len(us) != len(cs):
        raise ValueError("Atoms and weights must be non-empty and equally long")
    if any(u <= 0 for u in us) or len(set(us)) != len(us):
        raise ValueError(f"Atoms must be distinct and positive, got {list(atoms)}")
    if any(c <= 0 for c in cs):
        raise ValueError(f"Weights must be positive, got {list(weights)}")

    def kernel(x: float, y: float) -> float:
        return math.fsum(c * u ** (x + y) for u, c in zip(us, cs, strict=True))

    return KernelGrid.from_function(kernel, grid, grid)


# Rows (0, 2, 3) x cols (0, 1, 2) of T_b and rows (1, 2, 3) x cols (0, 1, 2)
# of T_c, 0-based.
_DELTA = PfSequence(0, (1,))
_BINOMIAL = PfSequence(0, (1, 2, 1))
_DELTA_MINOR = MinorIndex((0, 2, 3), (0, 1, 2))
_BINOMIAL_MINOR = MinorIndex((1, 2, 3), (0, 1, 2))


def _transformed_minor(
    F: Callable[[Any], Any], seq: PfSequence, t: Any, index: MinorIndex
) -> Scalar:
    section = seq.toeplitz(4)
    rows = [[F(t * section[i, j]) for j in index.cols] for i in index.rows]
    return det(RationalMatrix(rows))


def pfseq_origin_determinants(F: Callable[[Any], Any], t: Any) -> tuple[Scalar, Scalar]:
    """
    The two 3 x 3 determinants that force continuity at 0 of a map F
    sending PF sequences to PF sequences.

    With b = delta_0 and c = (1, 2, 1), returns the minors of F[t T_b] on
    rows (1, 3, 4), cols (1, 2, 3) and of F[t T_c] on rows (2, 3, 4),
    cols (1, 2, 3), 1-based. As t -> 0+ they tend to
    -F(0) (F(0+) - F(0))**2 and -F(0+) (F(0+) - F(0))**2.

    Example:
        >>> pfseq_origin_determinants(Atom(1), 1)
        (Fraction(-1, 1), Fraction(0, 1))
    """
    return (
        _transformed_minor(F, _DELTA, t, _DELTA_MINOR),
        _transformed_minor(F, _BINOMIAL, t, _BINOMIAL_MINOR),
    )


@dataclass(frozen=True)
class SequenceWitness:
    """A TN Toeplitz matrix whose image under a transform has a negative minor.

    Attributes:
        label: "negative", "cosine", "discretized" or "atom".
        matrix: The TN input matrix.
        image: The transformed matrix.
        witness: Negative minor of the image.
        params: Construction parameters (alpha, n, theta, N, window, ...).
    """

    label: str
    matrix: RationalMatrix
    image: RationalMatrix
    witness: Witness
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "params": self.params,
            "witness": witness_to_dict(self.witness),
            "matrix": matrix_to_dict(self.matrix),
            "image": matrix_to_dict(self.image),
        }


def _first_contiguous_failure(matrix: RationalMatrix) -> Witness | None:
    return contiguous_check(matrix, warn=False).witness


def toeplitz_power_witness(
    alpha: Any, max_n: int = 8, max_window: int = 24
) -> SequenceWitness | None:
    """
    A TN symmetric Toeplitz matrix A with A ** alpha (entrywise) not TN.

    - alpha < 0: A = [[2, 1], [1, 2]], det of the image is 4**alpha - 1.
    - alpha not an integer: the cosine matrix with n > alpha + 2 and
      theta = pi / 2n, whose power is not even PSD.
    - alpha = k >= 2: sections (M((i - j) / N))_{i,j < window} of the even
      PFF M = M_1, searched for N <= max_n by contiguous minors of M**k.

    Returns None when the discretized search finds no minor clearing the
    tolerance gate.

    Raises:
        ValueError: For alpha in {0, 1}, which preserve TN.
    """
    a = float(to_scalar(alpha, infer_kind([alpha])))
    if a in (0.0, 1.0):
        raise ValueError(f"x**{alpha} preserves TN symmetric Toeplitz matrices")
    if a < 0:
        base = RationalMatrix.exact([[2, 1], [1, 2]])
        image = RationalMatrix.floats([[2.0**a, 1.0], [1.0, 2.0**a]])
        index = MinorIndex((0, 1), (0, 1))
        return SequenceWitness(
            "negative", base, image, Witness(index, det(image)), {"alpha": a}
        )
    if not a.is_integer():
        n = math.floor(a) + 3
        theta = math.pi / (2 * n)
        res = cosine_jain(n, theta, a)
        assert res.tn.witness is not None
        return SequenceWitness(
            "cosine", res.base, res.powered, res.tn.witness,
            {"alpha": a, "n": n, "theta": theta},
        )
    k = int(a)
    m = MAlpha(1)
    for N in range(1, max_n + 1):
        seq = discretize_pff(m, N, (0, max_window - 1))
        section = RationalMatrix(
            [[seq[abs(i - j)] for j in range(max_window)] for i in range(max_window)],
            Kind.FLOAT,
        )
        image = RationalMatrix(
            [[float(v) ** k for v in row] for row in section.rows], Kind.FLOAT
        )
        found = _first_contiguous_failure(image)
        if found is not None:
            return SequenceWitness(
                "discretized", section, image, found,
                {"alpha": k, "N": N, "window": max_window},
            )
    return None


def atom_sequence_witness() -> SequenceWitness:
    """
    delta_0 is a PF sequence but its image under F = 1_{x=0} is not.

    The image of the Toeplitz section has the minor on rows (1, 3, 4),
    cols (1, 2, 3) (1-based) equal to -1.
    """
    section = _DELTA.toeplitz(4)
    image = section.map(Atom(1))
    value = det(image.submatrix(_DELTA_MINOR.rows, _DELTA_MINOR.cols))
    return SequenceWitness(
        "atom", section, image, Witness(_DELTA_MINOR, value), {"c": 1}
    )


def transform_report(f: PffFamily) -> dict[str, Any]:
    """Laplace transform of a family with its strip of convergence."""
    poly = f.exp_poly()
    lo, hi = strip_of_convergence(poly)
    return {
        "family": f.to_dict(),
        "transform": laplace_exp_poly(poly).to_dict(),
        "strip": [lo, hi if math.isfinite(hi) else None],
    }
