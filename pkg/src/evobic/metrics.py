"""Comparison of found biclusters against ground truth.

Clustering Error counts cells: found and true biclusters are paired
one-to-one to maximize the total number of shared cells, and that total is
divided by the number of cells covered by either set. 1 means a perfect
match. Recovery and relevance work on row sets only.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Bicluster, cell_overlap


class UndefinedMetric(ValueError):
    """Raised when a metric has an empty denominator."""


@dataclass(frozen=True)
class IntersectionMatrix:
    counts: np.ndarray  # found x truth, shared cells
    found_sizes: np.ndarray
    truth_sizes: np.ndarray
    union_size: int


def _coverage(biclusters: Sequence[Bicluster]) -> dict[int, Counter]:
    # row -> how many biclusters cover each of its columns
    by_row: dict[int, Counter] = {}
    for b in biclusters:
        for r in b.rows:
            by_row.setdefault(r, Counter()).update(b.cols)
    return by_row


def _union_size(found: Sequence[Bicluster], truth: Sequence[Bicluster]) -> int:
    """Cells covered by either set, a cell counting as often as the side
    covering it more often does. Without overlaps inside a set this is the
    plain cell union; with them, identical sets still score 1."""
    cf, ct = _coverage(found), _coverage(truth)
    total = 0
    for r in cf.keys() | ct.keys():
        a, b = cf.get(r, Counter()), ct.get(r, Counter())
        total += sum(max(a[c], b[c]) for c in a.keys() | b.keys())
    return total


def intersection_matrix(
    found: Sequence[Bicluster], truth: Sequence[Bicluster]
) -> IntersectionMatrix:
    if not found and not truth:
        raise UndefinedMetric("both bicluster sets are empty")
    counts = np.array(
        [[cell_overlap(f, t) for t in truth] for f in found], dtype=np.int64
    ).reshape(len(found), len(truth))
    return IntersectionMatrix(
        counts=counts,
        found_sizes=np.array([b.size for b in found], dtype=np.int64),
        truth_sizes=np.array([b.size for b in truth], dtype=np.int64),
        union_size=_union_size(found, truth),
    )


def hungarian_max(weights) -> tuple[list[tuple[int, int]], int | float]:
    """Maximum-weight assignment of rows to columns.

    The matrix is zero-padded to square and solved as a minimum-cost
    assignment with row/column potentials, O(n^3). Pairs that land in the
    padding are dropped from the returned assignment.

    Returns
    -------
    assignment : list of (row, col)
    total : sum of the assigned weights (int for integer input)
    """
    w = np.asarray(weights)
    if w.ndim != 2 or w.size == 0:
        raise ValueError("weights must be a nonempty 2-D matrix")
    n_rows, n_cols = w.shape
    n = max(n_rows, n_cols)
    padded = np.zeros((n, n), dtype=np.float64)
    padded[:n_rows, :n_cols] = w
    cost = padded.max() - padded

    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    match = [0] * (n + 1)  # match[col] = row, 1-based; 0 = free
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta, j1 = inf, 0
            row = cost[i0 - 1]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j], way[j] = cur, j0
                    if minv[j] < delta:
                        delta, j1 = minv[j], j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1

    assignment = sorted(
        (match[j] - 1, j - 1)
        for j in range(1, n + 1)
        if match[j] - 1 < n_rows and j - 1 < n_cols
    )
    total = sum(w[i, j] for i, j in assignment)
    if np.issubdtype(w.dtype, np.integer):
        total = int(total)
    return assignment, total


def clustering_error(found: Sequence[Bicluster], truth: Sequence[Bicluster]) -> float:
    """Matched shared cells over covered cells; 1 is a perfect match."""
    im = intersection_matrix(found, truth)
    if im.counts.size == 0:
        return 0.0
    _, d_max = hungarian_max(im.counts)
    return d_max / im.union_size


def row_jaccard(a: Bicluster, b: Bicluster) -> float:
    ra, rb = set(a.rows), set(b.rows)
    return len(ra & rb) / len(ra | rb)


def relevance(found: Sequence[Bicluster], truth: Sequence[Bicluster]) -> float:
    """Mean over found biclusters of the best row-Jaccard with any true one."""
    if not found:
        raise UndefinedMetric("relevance needs at least one found bicluster")
    if not truth:
        return 0.0
    return float(np.mean([max(row_jaccard(f, t) for t in truth) for f in found]))


def recovery(found: Sequence[Bicluster], truth: Sequence[Bicluster]) -> float:
    """Mean over true biclusters of the best row-Jaccard with any found one."""
    if not truth:
        raise UndefinedMetric("recovery needs at least one true bicluster")
    return relevance(truth, found)
