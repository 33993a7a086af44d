"""Core data types: expression matrix, chromosomes and biclusters.

Chromosomes are plain tuples of 0-based column indices. They are hashed and
compared millions of times during a run, so they carry no wrapper object.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Chromosome = tuple[int, ...]

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


class ValidationError(ValueError):
    """Raised when a value violates the invariants of its type."""


@dataclass(frozen=True)
class ExpressionMatrix:
    """Dense float64 matrix with row and column labels.

    Rows are genes, columns are conditions. ``values`` is copied into a
    C-contiguous, read-only float64 array on construction.
    """

    values: np.ndarray
    row_labels: list[str] = field(default_factory=list)
    col_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if values.ndim != 2:
            raise ValidationError(f"matrix must be 2-D, got {values.ndim}-D")
        if not np.isfinite(values).all():
            bad = np.argwhere(~np.isfinite(values))[0]
            raise ValidationError(
                f"non-finite value at row {bad[0]}, column {bad[1]}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

        rows, cols = values.shape
        row_labels = list(self.row_labels) or [f"r{i}" for i in range(rows)]
        col_labels = list(self.col_labels) or [f"c{j}" for j in range(cols)]
        if len(row_labels) != rows:
            raise ValidationError(f"{len(row_labels)} row labels for {rows} rows")
        if len(col_labels) != cols:
            raise ValidationError(f"{len(col_labels)} column labels for {cols} columns")
        if len(set(row_labels)) != rows:
            raise ValidationError("row labels are not unique")
        if len(set(col_labels)) != cols:
            raise ValidationError("column labels are not unique")
        object.__setattr__(self, "row_labels", row_labels)
        object.__setattr__(self, "col_labels", col_labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def scaled(self, factor: float) -> "ExpressionMatrix":
        return ExpressionMatrix(self.values * factor, self.row_labels, self.col_labels)


@dataclass(frozen=True, order=True)
class Bicluster:
    """A submatrix given by sorted row and column index tuples."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self):
        rows = tuple(sorted({int(r) for r in self.rows}))
        cols = tuple(sorted({int(c) for c in self.cols}))
        if not rows or not cols:
            raise ValidationError("bicluster needs at least one row and one column")
        if rows[0] < 0 or cols[0] < 0:
            raise ValidationError("negative index in bicluster")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @property
    def size(self) -> int:
        return len(self.rows) * len(self.cols)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    def check_bounds(self, n_rows: int, n_cols: int) -> None:
        if self.rows[-1] >= n_rows or self.cols[-1] >= n_cols:
            raise ValidationError(
                f"bicluster index out of range for a {n_rows}x{n_cols} matrix"
            )


BiclusterSet = list[Bicluster]


def validate_chromosome(c: Sequence[int], num_cols: int) -> Chromosome:
    """Return ``c`` as a tuple, raising if it is not a valid chromosome."""
    c = tuple(int(i) for i in c)
    if len(c) < 2:
        raise ValidationError(f"chromosome needs at least 2 columns, got {len(c)}")
    if len(set(c)) != len(c):
        raise ValidationError(f"duplicate column in chromosome {c}")
    if min(c) < 0 or max(c) >= num_cols:
        raise ValidationError(f"chromosome {c} out of range for {num_cols} columns")
    return c


def bicluster_cells(b: Bicluster) -> set[tuple[int, int]]:
    return {(r, c) for r in b.rows for c in b.cols}


def chromosome_hash(c: Iterable[int]) -> int:
    """64-bit FNV-1a fold over the column indices, one word per index."""
    h = _FNV_OFFSET
    for idx in c:
        h = ((h ^ (idx & _MASK64)) * _FNV_PRIME) & _MASK64
    return h


def cell_overlap(a: Bicluster, b: Bicluster) -> int:
    """Number of shared cells; the cell set of a bicluster is a product set."""
    if not a.rows or not b.rows:
        return 0
    shared_rows = len(set(a.rows).intersection(b.rows))
    if not shared_rows:
        return 0
    return shared_rows * len(set(a.cols).intersection(b.cols))


def cell_jaccard(a: Bicluster, b: Bicluster) -> float:
    inter = cell_overlap(a, b)
    union = a.size + b.size - inter
    return inter / union
