"""
Scalar coercion for matrix entries.

Every matrix is homogeneous in one of two scalar kinds:

- ``Kind.EXACT``: ``fractions.Fraction`` entries, always in lowest terms
- ``Kind.FLOAT``: finite binary64 ``float`` entries

Example:
    >>> from totpos._scalar import Kind, to_scalar
    >>> to_scalar("3/6", Kind.EXACT)
    Fraction(1, 2)
    >>> to_scalar(2, Kind.FLOAT)
    2.0
"""

from __future__ import annotations

import math
import numbers
from collections.abc import Iterable
from enum import Enum
from fractions import Fraction

__all__ = [
    "Kind",
    "Scalar",
    "to_scalar",
    "infer_kind",
    "is_exact_value",
    "format_scalar",
    "parse_scalar",
]

Scalar = Fraction | float


class Kind(str, Enum):
    """Arithmetic kind of a matrix."""

    EXACT = "exact"
    FLOAT = "float"


def is_exact_value(value: object) -> bool:
    """Return True if value is representable without rounding.

    Integers, Fractions and ``"p/q"`` strings are exact; floats are not,
    even when integral.
    """
    if isinstance(value, bool):
        return True
    if isinstance(value, numbers.Rational):
        return True
    if isinstance(value, str):
        try:
            Fraction(value.strip())
        except ValueError:
            return False
        return "." not in value and "e" not in value.lower()
    return False


def infer_kind(values: Iterable[object]) -> Kind:
    """Infer the kind of a collection: exact unless any entry is inexact."""
    for value in values:
        if not is_exact_value(value):
            return Kind.FLOAT
    return Kind.EXACT


def parse_scalar(text: str, kind: Kind) -> Scalar:
    """Parse a textual entry such as ``"3/4"``, ``"-2"`` or ``"0.25"``."""
    text = text.strip()
    if kind is Kind.EXACT:
        try:
            return Fraction(text)
        except ValueError:
            raise ValueError(f"Invalid exact entry: {text!r}") from None
    try:
        return _finite(float(Fraction(text)) if "/" in text else float(text))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"Invalid float entry: {text!r}") from None


def to_scalar(value: object, kind: Kind) -> Scalar:
    """Coerce a single value to the given kind.

    Args:
        value: int, Fraction, float, numpy scalar or numeric string.
        kind: Target kind.

    Returns:
        A Fraction (exact) or finite float.

    Raises:
        ValueError: If the value is non-finite, unparsable, or a
            non-integral float requested as exact.
        TypeError: If the value is not numeric at all.
    """
    if isinstance(value, str):
        return parse_scalar(value, kind)
    if kind is Kind.EXACT:
        if isinstance(value, numbers.Rational):
            return Fraction(int(value.numerator), int(value.denominator))
        if isinstance(value, numbers.Real):
            as_float = float(value)
            if math.isfinite(as_float) and as_float.is_integer():
                return Fraction(int(as_float))
            raise ValueError(
                f"Exact kind requires int, Fraction or 'p/q' entries, got {value!r}"
            )
        raise TypeError(f"Not a real number: {value!r}")
    if isinstance(value, numbers.Real):
        return _finite(float(value))
    raise TypeError(f"Not a real number: {value!r}")


def format_scalar(value: Scalar) -> str | float:
    """JSON form of a scalar: ``"p/q"`` strings for exact, plain floats otherwise."""
    if isinstance(value, Fraction):
        return str(value)
    return float(value)


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise ValueError(f"Non-finite float entry: {value!r}")
    return value
