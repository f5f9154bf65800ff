"""
Entrywise transforms F[A] = (F(a_ij)).

The menu of transforms:

- Constant(c):        F(x) = c
- Power(alpha, c):    F(x) = c * x**alpha, with 0**0 = 1
- Step(c):            F(x) = c * 1_{x > 0}
- Atom(c):            F(x) = c * 1_{x = 0}
- Polynomial(coeffs): F(x) = sum coeffs[k] * x**k (a truncated power series)

Example:
    >>> from totpos import Power, RationalMatrix, apply_entrywise
    >>> apply_entrywise(RationalMatrix.exact([[1, 2], [3, 4]]), Power(2)).rows
    ((Fraction(1, 1), Fraction(4, 1)), (Fraction(9, 1), Fraction(16, 1)))
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from totpos._matrix import RationalMatrix
from totpos._scalar import Kind, Scalar, format_scalar, is_exact_value, to_scalar

__all__ = [
    "TransformSpec",
    "Constant",
    "Power",
    "Step",
    "Atom",
    "Polynomial",
    "apply_entrywise",
    "parse_transform",
]


def _coerce(value: Any) -> Fraction | float:
    """Keep rational parameters exact, everything else becomes float."""
    if is_exact_value(value):
        return to_scalar(value, Kind.EXACT)
    as_float = float(value)
    if as_float.is_integer():
        return Fraction(int(as_float))
    return as_float


class TransformSpec(ABC):
    """A scalar function applied entrywise to a matrix."""

    @property
    @abstractmethod
    def exact_capable(self) -> bool:
        """True if rational inputs give rational outputs."""

    @abstractmethod
    def evaluate(self, x: Scalar) -> Scalar:
        """Value at one entry; raises ValueError outside the domain."""

    @abstractmethod
    def to_dict(self) -> dict[str, Any]: ...

    def __call__(self, x: Scalar) -> Scalar:
        return self.evaluate(x)


@dataclass(frozen=True)
class Constant(TransformSpec):
    c: Fraction | float = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _coerce(self.c))

    @property
    def exact_capable(self) -> bool:
        return isinstance(self.c, Fraction)

    def evaluate(self, x: Scalar) -> Scalar:
        return self.c

    def to_dict(self) -> dict[str, Any]:
        return {"type": "constant", "c": format_scalar(self.c)}


@dataclass(frozen=True)
class Power(TransformSpec):
    """F(x) = c * x**alpha on x >= 0 (x > 0 when alpha < 0).

    Integral alpha (including floats such as 2.0) is stored as an exact
    integer, so exact matrices stay exact.
    """

    alpha: Fraction | float
    c: Fraction | float = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _coerce(self.alpha))
        object.__setattr__(self, "c", _coerce(self.c))
        if float(self.c) <= 0:
            raise ValueError(f"Power transform needs c > 0, got {self.c}")

    @property
    def is_integral(self) -> bool:
        return isinstance(self.alpha, Fraction) and self.alpha.denominator == 1

    @property
    def exact_capable(self) -> bool:
        return self.is_integral and isinstance(self.c, Fraction)

    def evaluate(self, x: Scalar) -> Scalar:
        if x < 0 and not self.is_integral:
            raise ValueError(f"Negative entry {x} with non-integer power {self.alpha}")
        if x == 0:
            if self.alpha < 0:
                raise ValueError(f"Zero entry is outside the domain of x**{self.alpha}")
            if self.alpha == 0:
                return self.c if isinstance(x, Fraction) else float(self.c)
        if isinstance(x, Fraction) and self.exact_capable:
            return self.c * x ** int(self.alpha)
        return float(self.c) * float(x) ** float(self.alpha)

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": "power",
            "alpha": format_scalar(self.alpha),
            "c": format_scalar(self.c),
        }


@dataclass(frozen=True)
class Step(TransformSpec):
    c: Fraction | float = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _coerce(self.c))

    @property
    def exact_capable(self) -> bool:
        return isinstance(self.c, Fraction)

    def evaluate(self, x: Scalar) -> Scalar:
        return self.c if x > 0 else self.c * 0

    def to_dict(self) -> dict[str, Any]:
        return {"type": "step", "c": format_scalar(self.c)}


@dataclass(frozen=True)
class Atom(TransformSpec):
    c: Fraction | float = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _coerce(self.c))

    @property
    def exact_capable(self) -> bool:
        return isinstance(self.c, Fraction)

    def evaluate(self, x: Scalar) -> Scalar:
        return self.c if x == 0 else self.c * 0

    def to_dict(self) -> dict[str, Any]:
        return {"type": "atom", "c": format_scalar(self.c)}


@dataclass(frozen=True)
class Polynomial(TransformSpec):
    """F(x) = coeffs[0] + coeffs[1] x + ... (ascending powers)."""

    coeffs: tuple[Fraction | float, ...]

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise ValueError("Polynomial transform needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(_coerce(a) for a in self.coeffs))

    @property
    def exact_capable(self) -> bool:
        return all(isinstance(a, Fraction) for a in self.coeffs)

    def evaluate(self, x: Scalar) -> Scalar:
        exact = isinstance(x, Fraction) and self.exact_capable
        acc: Scalar = Fraction(0) if exact else 0.0
        for a in reversed(self.coeffs):
            acc = acc * x + a if exact else acc * float(x) + float(a)
        return acc

    def to_dict(self) -> dict[str, Any]:
        return {"type": "polynomial", "coeffs": [format_scalar(a) for a in self.coeffs]}


def apply_entrywise(matrix: RationalMatrix, transform: TransformSpec) -> RationalMatrix:
    """
    Entrywise image F[M].

    The result is exact only when M is exact and the transform maps
    rationals to rationals (integral powers, rational polynomials and
    rational constants); otherwise it is float.

    Raises:
        ValueError: If an entry lies outside the transform's domain.
    """
    kind = Kind.EXACT if matrix.is_exact and transform.exact_capable else Kind.FLOAT
    return RationalMatrix(
        [[transform.evaluate(v) for v in row] for row in matrix.rows], kind
    )


def parse_transform(text: str) -> TransformSpec:
    """Parse a transform spec.

    Accepted forms: ``power:alpha[:c]``, ``const:c``, ``step:c``, ``atom:c``
    and ``poly:a0,a1,...``.

    Raises:
        ValueError: On an unknown transform name or malformed parameters.
    """
    name, _, rest = text.strip().partition(":")
    params = [p for p in rest.split(":") if p] if rest else []
    try:
        if name == "power":
            if not 1 <= len(params) <= 2:
                raise ValueError("power takes alpha and an optional c")
            values = [_parse_number(p) for p in params]
            return Power(*values)
        if name in ("const", "constant"):
            return Constant(_parse_number(params[0]) if params else 1)
        if name == "step":
            return Step(_parse_number(params[0]) if params else 1)
        if name == "atom":
            return Atom(_parse_number(params[0]) if params else 1)
        if name in ("poly", "polynomial"):
            coeffs = rest.split(",") if rest else []
            return Polynomial(tuple(_parse_number(a) for a in coeffs))
    except (IndexError, ZeroDivisionError) as e:
        raise ValueError(f"Malformed transform {text!r}: {e}") from None
    raise ValueError(
        f"Unknown transform {name!r}; expected power, const, step, atom or poly"
    )


def _parse_number(text: str) -> Fraction | float:
    text = text.strip()
    if is_exact_value(text):
        return Fraction(text)
    return float(text)
