"""CSV ingestion with missing cells and matrix serialization.

Input CSVs hold one sample per row and one variable per column. Empty cells,
``NA`` and ``NaN`` (any case) are missing. A first row containing a non-numeric,
non-missing cell is taken as a header.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .errors import DataError
from .masked import MaskedMatrix

__all__ = ["read_data_csv", "write_matrix_csv", "read_matrix_csv", "write_edges_csv"]

_MISSING = {"", "na", "nan"}


def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in _MISSING


def _parse(cell: str) -> float | None:
    if _is_missing(cell):
        return None
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _rows(path: str | Path) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    return rows


def _has_header(first: list[str]) -> bool:
    return any(not _is_missing(c) and _parse(c) is None for c in first)


def read_data_csv(path: str | Path) -> tuple[MaskedMatrix, list[str]]:
    """Read a samples-by-variables CSV into a p x n ``MaskedMatrix``.

    Returns the matrix and the variable names (header, or ``V1..Vp``).
    """
    rows = _rows(path)
    if _has_header(rows[0]):
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    else:
        names = [f"V{j + 1}" for j in range(len(rows[0]))]
    p = len(names)
    if not rows:
        raise DataError(f"{path} has a header but no data rows")
    values = np.zeros((len(rows), p))
    mask = np.zeros((len(rows), p), dtype=bool)
    for r, row in enumerate(rows):
        if len(row) != p:
            raise DataError(f"{path}: row {r + 1} has {len(row)} fields, expected {p}")
        for c, cell in enumerate(row):
            if _is_missing(cell):
                continue
            v = _parse(cell)
            if v is None:
                raise DataError(f"{path}: non-numeric value {cell!r} in row {r + 1}, column {names[c]}")
            values[r, c] = v
            mask[r, c] = True
    return MaskedMatrix(values.T, mask.T), names


def write_matrix_csv(path: str | Path, A: NDArray[np.float64], names: Sequence[str] | None = None) -> None:
    """Write a matrix with 17 significant digits so it reads back bit-exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if names is not None:
            w.writerow(list(names))
        for row in np.asarray(A, dtype=np.float64):
            w.writerow([format(float(x), ".17g") for x in row])


def read_matrix_csv(path: str | Path) -> tuple[NDArray[np.float64], list[str] | None]:
    rows = _rows(path)
    names = None
    if _has_header(rows[0]):
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    try:
        A = np.array([[float(c) for c in row] for row in rows], dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"{path}: matrix CSV must be fully numeric") from exc
    if A.ndim != 2:
        raise DataError(f"{path}: rows have unequal lengths")
    return A, names


def write_edges_csv(path: str | Path, edges: Sequence[tuple], header: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(header))
        for e in edges:
            w.writerow([format(x, ".17g") if isinstance(x, float) else x for x in e])
