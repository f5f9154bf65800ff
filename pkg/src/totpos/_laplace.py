"""
Exponential polynomials and their bilateral Laplace transforms.

An exponential polynomial is a finite sum of terms c * x**k * exp(-a x),
either one-sided (zero for x < 0) or even (in |x|). Its bilateral Laplace
transform B{f}(s) = integral of exp(-x s) f(x) dx is the rational function

    one-sided:  c * k! / (s + a)**(k+1)
    even:       c * k! * (1 / (s + a)**(k+1) + 1 / (a - s)**(k+1))

summed over the terms. Rational coefficients and rates give exact sympy
polynomials over QQ; anything else falls back to floating coefficients
with ``exact=False``.

Example:
    >>> from totpos import ExpPoly, ExpTerm
    >>> m1 = ExpPoly((ExpTerm(2, 1), ExpTerm(-1, 2)), even=True)
    >>> laplace_exp_poly(m1).to_dict()["numerator"]
    ['12']
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import sympy

from totpos._scalar import is_exact_value

__all__ = [
    "S",
    "ExpTerm",
    "ExpPoly",
    "RationalFunction",
    "laplace_exp_poly",
    "strip_of_convergence",
    "to_sympy_number",
]

S = sympy.Symbol("s")


def to_sympy_number(value: Any) -> sympy.Expr:
    """Rational values become sympy Rationals, everything else a Float."""
    if isinstance(value, sympy.Basic):
        return value if value.is_Rational else sympy.Float(float(value))
    if is_exact_value(value):
        frac = Fraction(value)
        return sympy.Rational(frac.numerator, frac.denominator)
    return sympy.Float(float(value))


def _is_exact(value: sympy.Expr) -> bool:
    return bool(value.is_Rational)


@dataclass(frozen=True)
class ExpTerm:
    """c * x**power * exp(-rate * x).

    Attributes:
        coeff: Real coefficient c.
        rate: Decay rate a > 0.
        power: Non-negative integer k.
    """

    coeff: Any
    rate: Any
    power: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff", to_sympy_number(self.coeff))
        object.__setattr__(self, "rate", to_sympy_number(self.rate))
        if not self.rate > 0:
            raise ValueError(f"Exponential rate must be positive, got {self.rate}")
        if self.power < 0:
            raise ValueError(f"Power must be non-negative, got {self.power}")

    @property
    def exact(self) -> bool:
        return _is_exact(self.coeff) and _is_exact(self.rate)

    def value(self, t: float) -> float:
        """Term value at t >= 0."""
        return float(self.coeff) * t**self.power * math.exp(-float(self.rate) * t)


@dataclass(frozen=True)
class ExpPoly:
    """A one-sided or even exponential polynomial.

    Attributes:
        terms: The summands.
        even: Evaluate at |x| on the whole line instead of vanishing on x < 0.
    """

    terms: tuple[ExpTerm, ...]
    even: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("An exponential polynomial needs at least one term")

    @property
    def exact(self) -> bool:
        return all(term.exact for term in self.terms)

    def __call__(self, x: float) -> float:
        x = float(x)
        if x < 0 and not self.even:
            return 0.0
        t = abs(x)
        return math.fsum(term.value(t) for term in self.terms)

    def __add__(self, other: ExpPoly) -> ExpPoly:
        if self.even != other.even:
            raise ValueError("Cannot add one-sided and even exponential polynomials")
        return ExpPoly(self.terms + other.terms, self.even)


def _poly(expr: Any, exact: bool) -> sympy.Poly:
    domain = sympy.QQ if exact else sympy.RR
    return sympy.Poly(expr, S, domain=domain)


class RationalFunction:
    """
    p(s) / q(s) with q monic.

    Common factors of p and q are kept; gcd() reports them.

    Args:
        numerator: Polynomial p in ``S`` (Poly or expression).
        denominator: Non-zero polynomial q in ``S``.
        exact: Coefficients in QQ (True) or floats (False).

    Raises:
        ValueError: If the denominator is zero.
    """

    def __init__(self, numerator: Any, denominator: Any, exact: bool = True) -> None:
        p = _poly(numerator, exact)
        q = _poly(denominator, exact)
        if q.is_zero:
            raise ValueError("Denominator of a rational function must be non-zero")
        lead = q.LC()
        self.exact = exact
        self.numerator = p.quo_ground(lead) if exact else p * (1 / lead)
        self.denominator = q.monic() if exact else q * (1 / lead)

    def __repr__(self) -> str:
        return (
            f"RationalFunction({self.numerator.as_expr()}, "
            f"{self.denominator.as_expr()}, exact={self.exact})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        if not (self.exact and other.exact):
            return False
        return (
            self.numerator * other.denominator == other.numerator * self.denominator
        )

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: RationalFunction) -> RationalFunction:
        exact = self.exact and other.exact
        p1, q1 = self._as(exact)
        p2, q2 = other._as(exact)
        if exact:
            q = q1.lcm(q2)
            p = p1 * q.quo(q1) + p2 * q.quo(q2)
        else:
            q = q1 * q2
            p = p1 * q2 + p2 * q1
        return RationalFunction(p, q, exact)

    def _as(self, exact: bool) -> tuple[sympy.Poly, sympy.Poly]:
        if exact == self.exact:
            return self.numerator, self.denominator
        return (
            _poly(self.numerator.as_expr(), exact),
            _poly(self.denominator.as_expr(), exact),
        )

    def __call__(self, s: Any) -> Any:
        point = to_sympy_number(s)
        value = self.numerator.eval(point) / self.denominator.eval(point)
        return value if self.exact and _is_exact(point) else float(value)

    def gcd(self) -> sympy.Poly:
        """gcd(p, q) over QQ.

        Raises:
            ValueError: For float coefficients, where gcd is not meaningful.
        """
        if not self.exact:
            raise ValueError("gcd needs exact coefficients")
        return self.numerator.gcd(self.denominator)

    def is_polynomial_reciprocal(self) -> bool:
        """True if q / p is a polynomial, i.e. p divides q."""
        if self.numerator.is_zero:
            return False
        if self.exact:
            return self.denominator.rem(self.numerator).is_zero
        return self.numerator.degree() == 0

    def to_dict(self) -> dict[str, Any]:
        """Coefficient lists, highest degree first."""
        fmt = str if self.exact else float
        return {
            "numerator": [fmt(c) for c in self.numerator.all_coeffs()],
            "denominator": [fmt(c) for c in self.denominator.all_coeffs()],
            "exact": self.exact,
        }


def _term_transform(term: ExpTerm, even: bool, exact: bool) -> RationalFunction:
    scale = term.coeff * sympy.factorial(term.power)
    k = term.power + 1
    if not even:
        return RationalFunction(scale, (S + term.rate) ** k, exact)
    # 1/(s+a)^k + 1/(a-s)^k over the common denominator (a^2 - s^2)^k
    numerator = scale * ((term.rate - S) ** k + (S + term.rate) ** k)
    return RationalFunction(numerator, ((term.rate + S) * (term.rate - S)) ** k, exact)


def laplace_exp_poly(f: ExpPoly) -> RationalFunction:
    """Bilateral Laplace transform of an exponential polynomial."""
    return _sum_transforms(
        _term_transform(term, f.even, f.exact) for term in f.terms
    )


def strip_of_convergence(f: ExpPoly) -> tuple[float, float]:
    """(-min a, min a) for even terms, (-min a, inf) for one-sided ones."""
    low = min(float(term.rate) for term in f.terms)
    return -low, (low if f.even else math.inf)


def _sum_transforms(parts: Iterable[RationalFunction]) -> RationalFunction:
    items: Sequence[RationalFunction] = list(parts)
    if not items:
        raise ValueError("Nothing to sum")
    total = items[0]
    for part in items[1:]:
        total = total + part
    return total
