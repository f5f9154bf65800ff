"""
Shared result types, sampled kernels and exceptions.

The objects here are plain frozen dataclasses so verdicts and witnesses can
be compared, hashed into sets, and serialized without surprises:

- MinorIndex: strictly increasing row and column tuples of equal length
- Witness: the minor (and its value) that certifies a FAIL verdict
- Verdict: status, tested order, tolerance, optional witness
- KernelGrid: a kernel sampled on increasing coordinate grids

Exceptions:
- NotTotallyPositiveError: input required to be TN/TP was not
- DegenerateExponentsError: coincident exponent sums in a power expansion
- AmbiguousVerdictWarning: a float verdict flips within 10x of its tolerance
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from totpos._scalar import Scalar

__all__ = [
    "Status",
    "MinorIndex",
    "Witness",
    "Verdict",
    "KernelGrid",
    "NotTotallyPositiveError",
    "DegenerateExponentsError",
    "AmbiguousVerdictWarning",
]


class Status(str, Enum):
    """Outcome of a sign test."""

    TN = "TN"
    TP = "TP"
    FAIL = "FAIL"


@dataclass(frozen=True)
class MinorIndex:
    """Row and column index tuples selecting a square submatrix.

    Attributes:
        rows: Strictly increasing 0-based row indices.
        cols: Strictly increasing 0-based column indices, same length.

    Example:
        >>> MinorIndex((0, 2), (1, 3)).order
        2
    """

    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.rows) != len(self.cols):
            raise ValueError(
                f"Row and column tuples differ in length: {self.rows} vs {self.cols}"
            )
        if not self.rows:
            raise ValueError("A minor needs at least one row")
        for name, seq in (("rows", self.rows), ("cols", self.cols)):
            if any(i < 0 for i in seq):
                raise ValueError(f"Negative index in {name}: {seq}")
            if any(a >= b for a, b in zip(seq, seq[1:], strict=False)):
                raise ValueError(f"{name} must be strictly increasing: {seq}")

    @property
    def order(self) -> int:
        return len(self.rows)

    def shifted(self, row_offset: int = 0, col_offset: int = 0) -> MinorIndex:
        """Same minor with every index moved by a fixed offset."""
        return MinorIndex(
            tuple(i + row_offset for i in self.rows),
            tuple(j + col_offset for j in self.cols),
        )


@dataclass(frozen=True)
class Witness:
    """A minor whose value violates the tested sign condition."""

    index: MinorIndex
    value: Scalar


@dataclass(frozen=True)
class Verdict:
    """Result of a TN_p / TP_p test.

    Attributes:
        status: TN or TP when the test holds, FAIL otherwise.
        order: The order p that was tested.
        tol: Hadamard-relative tolerance used (0 for exact input).
        witness: The first violating minor; present exactly when FAIL.
        ambiguous: True if some examined minor changes verdict between
            tol/10 and 10*tol.
        examined: Number of minors evaluated before the verdict was reached.
    """

    status: Status
    order: int
    tol: float = 0.0
    witness: Witness | None = None
    ambiguous: bool = False
    examined: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if (self.status is Status.FAIL) != (self.witness is not None):
            raise ValueError("A verdict carries a witness exactly when it fails")

    @property
    def passed(self) -> bool:
        return self.status is not Status.FAIL

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True, eq=False)
class KernelGrid:
    """A kernel K sampled on X x Y.

    Attributes:
        xs: Strictly increasing row coordinates.
        ys: Strictly increasing column coordinates.
        values: Float array of shape (len(xs), len(ys)), values[i, j] = K(xs[i], ys[j]).

    Example:
        >>> grid = KernelGrid.from_function(lambda x, y: x * y, (1, 2), (1, 2, 3))
        >>> grid.values.shape
        (2, 3)
    """

    xs: tuple[float, ...]
    ys: tuple[float, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "xs", tuple(float(x) for x in self.xs))
        object.__setattr__(self, "ys", tuple(float(y) for y in self.ys))
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.shape != (len(self.xs), len(self.ys)):
            raise ValueError(
                f"Grid values have shape {values.shape}, "
                f"expected {(len(self.xs), len(self.ys))}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Kernel values must be finite")
        for name, coords in (("xs", self.xs), ("ys", self.ys)):
            if not coords:
                raise ValueError(f"{name} must be non-empty")
            if any(a >= b for a, b in zip(coords, coords[1:], strict=False)):
                raise ValueError(f"{name} must be strictly increasing")

    @classmethod
    def from_function(
        cls,
        kernel: Any,
        xs: Any,
        ys: Any,
    ) -> KernelGrid:
        """Sample a callable ``kernel(x, y)`` on the product grid."""
        xs = tuple(float(x) for x in xs)
        ys = tuple(float(y) for y in ys)
        values = np.array([[float(kernel(x, y)) for y in ys] for x in xs])
        return cls(xs, ys, values)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.xs), len(self.ys)

    def index_of(self, coord: float, axis: int) -> int:
        """Position of an exact grid coordinate on axis 0 (x) or 1 (y)."""
        coords = self.xs if axis == 0 else self.ys
        try:
            return coords.index(float(coord))
        except ValueError:
            raise ValueError(
                f"Node {coord!r} is not on the {'x' if axis == 0 else 'y'} grid"
            ) from None

    def is_symmetric(self, rtol: float = 0.0) -> bool:
        if self.xs != self.ys:
            return False
        scale = float(np.max(np.abs(self.values))) or 1.0
        return bool(np.all(np.abs(self.values - self.values.T) <= rtol * scale))


class NotTotallyPositiveError(ValueError):
    """Raised when an operation needs TN/TP input and the check fails.

    Attributes:
        verdict: The failing Verdict, including its witness.
    """

    def __init__(self, message: str, verdict: Verdict) -> None:
        super().__init__(message)
        self.verdict = verdict


class DegenerateExponentsError(ValueError):
    """Raised when distinct multi-indices produce the same exponent sum."""


class AmbiguousVerdictWarning(UserWarning):
    """A float verdict would flip if the tolerance moved by a factor of 10."""
