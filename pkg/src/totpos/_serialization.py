"""
JSON and CSV codecs for matrices and verdicts.

Matrix documents look like::

    {"kind": "exact", "rows": [["1", "1/2"], ["0", "3"]]}

with exact entries as ``"p/q"`` strings and float entries as JSON numbers.
Verdict documents::

    {"status": "FAIL", "order": 2, "tol": 0.0, "ambiguous": false,
     "witness": {"rows": [0, 1], "cols": [0, 1], "value": "-1"}}
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

from totpos._matrix import RationalMatrix
from totpos._scalar import Kind, format_scalar
from totpos._types import Verdict, Witness

__all__ = [
    "matrix_to_dict",
    "matrix_from_dict",
    "witness_to_dict",
    "verdict_to_dict",
    "load_matrix",
    "parse_matrix_text",
    "dump_json",
]


def matrix_to_dict(matrix: RationalMatrix) -> dict[str, Any]:
    return {
        "kind": matrix.kind.value,
        "rows": [[format_scalar(v) for v in row] for row in matrix.rows],
    }


def matrix_from_dict(doc: Any) -> RationalMatrix:
    """Build a matrix from its JSON document.

    ``kind`` is optional; when absent it is inferred from the entries
    (strings without a decimal point and integers are exact).

    Raises:
        ValueError: If the document is not a mapping with a ``rows`` list.
    """
    if isinstance(doc, list):
        doc = {"rows": doc}
    if not isinstance(doc, dict) or "rows" not in doc:
        raise ValueError('Matrix document must be an object with a "rows" list')
    rows = doc["rows"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ValueError('"rows" must be a list of lists')
    kind = doc.get("kind")
    if kind is not None and kind not in (k.value for k in Kind):
        raise ValueError(f'"kind" must be "exact" or "float", got {kind!r}')
    return RationalMatrix(rows, kind)


def witness_to_dict(witness: Witness) -> dict[str, Any]:
    return {
        "rows": list(witness.index.rows),
        "cols": list(witness.index.cols),
        "value": format_scalar(witness.value),
    }


def verdict_to_dict(verdict: Verdict) -> dict[str, Any]:
    return {
        "status": verdict.status.value,
        "order": verdict.order,
        "witness": (
            None if verdict.witness is None else witness_to_dict(verdict.witness)
        ),
        "tol": verdict.tol,
        "ambiguous": verdict.ambiguous,
    }


def parse_matrix_text(text: str, source: str = "<input>") -> RationalMatrix:
    """Parse JSON, falling back to CSV when the text is not a JSON document.

    Raises:
        ValueError: With a ``source:line:col`` prefix for malformed JSON.
    """
    stripped = text.lstrip()
    if stripped.startswith(("{", "[")):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValueError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from None
        return matrix_from_dict(doc)
    reader = csv.reader(io.StringIO(text))
    rows = [
        [cell.strip() for cell in row] for row in reader if any(c.strip() for c in row)
    ]
    if not rows:
        raise ValueError(f"{source}: no matrix rows found")
    return RationalMatrix(rows, Kind.FLOAT)


def load_matrix(path: str | Path) -> RationalMatrix:
    """Read a matrix from a JSON or CSV file (CSV is always float kind)."""
    path = Path(path)
    return parse_matrix_text(path.read_text(), str(path))


def dump_json(doc: Any, path: str | Path | None = None, indent: int = 2) -> str:
    """Serialize a report document; also write it to ``path`` when given."""
    text = json.dumps(doc, indent=indent, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
