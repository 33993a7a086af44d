"""Trend detection and population scoring.

A row supports a chromosome when its values, read in chromosome order, rise
at every step, allowing each step to dip by ``approx`` times the magnitude of
the previous value. Scoring a population is an embarrassingly parallel count
over the (chromosome, row) grid: rows are split into contiguous blocks, each
worker produces integer counts for its block, and the blocks are summed. The
sum is exact, so the result does not depend on the number of workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numba
import numpy as np

from .core import Chromosome, ExpressionMatrix, ValidationError

# below this many (row, chromosome) pairs a thread pool costs more than it saves
_PARALLEL_MIN_WORK = 1 << 18


@dataclass(frozen=True)
class TrendParams:
    approx: float = 0.03
    negative_trends: bool = False
    min_rows: int = 10
    col_cap: int = 8

    def __post_init__(self):
        if not 0.0 <= self.approx < 1.0:
            raise ValidationError(f"approx must be in [0, 1), got {self.approx}")
        if self.min_rows < 2:
            raise ValidationError(f"min_rows must be >= 2, got {self.min_rows}")
        if self.col_cap < 2:
            raise ValidationError(f"col_cap must be >= 2, got {self.col_cap}")


@numba.njit(nogil=True, cache=True)
def _row_ok(row, flat, start, stop, approx, negative):
    ok = True
    for i in range(start, stop - 1):
        a = row[flat[i]]
        b = row[flat[i + 1]]
        if not b > a - approx * abs(a):
            ok = False
            break
    if ok or not negative:
        return ok
    for i in range(start, stop - 1):
        a = row[flat[i + 1]]
        b = row[flat[i]]
        if not b > a - approx * abs(a):
            return False
    return True


@numba.njit(nogil=True, cache=True)
def _count_block(values, flat, offsets, approx, negative, r0, r1, out):
    n = offsets.shape[0] - 1
    for r in range(r0, r1):
        row = values[r]
        for k in range(n):
            if _row_ok(row, flat, offsets[k], offsets[k + 1], approx, negative):
                out[k] += 1


@numba.njit(nogil=True, cache=True)
def _mask_block(values, flat, approx, negative, r0, r1, out):
    n = flat.shape[0]
    for r in range(r0, r1):
        out[r] = _row_ok(values[r], flat, 0, n, approx, negative)


def pack_population(pop: Sequence[Chromosome]) -> tuple[np.ndarray, np.ndarray]:
    """Flatten a population into (column indices, offsets) arrays."""
    offsets = np.zeros(len(pop) + 1, dtype=np.int64)
    if pop:
        np.cumsum([len(c) for c in pop], out=offsets[1:])
    flat = np.fromiter(
        (col for c in pop for col in c), dtype=np.int64, count=int(offsets[-1])
    )
    return flat, offsets


def default_workers() -> int:
    return os.cpu_count() or 1


@lru_cache(maxsize=None)
def _executor(workers: int) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="evobic-eval")


def _row_blocks(n_rows: int, parts: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, n_rows, parts + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def row_supports(
    m: ExpressionMatrix, row: int, c: Chromosome, p: TrendParams
) -> bool:
    values = m.values[row]

    def chain_holds(seq):
        for prev, nxt in zip(seq, seq[1:]):
            a, b = values[prev], values[nxt]
            if not b > a - p.approx * abs(a):
                return False
        return True

    if chain_holds(c):
        return True
    return p.negative_trends and chain_holds(c[::-1])


def support_mask(
    m: ExpressionMatrix, c: Chromosome, p: TrendParams, workers: int = 1
) -> np.ndarray:
    """Boolean vector over rows: which rows follow the trend of ``c``."""
    flat = np.asarray(c, dtype=np.int64)
    out = np.zeros(m.rows, dtype=np.bool_)
    blocks = _row_blocks(m.rows, workers if m.rows * len(c) >= _PARALLEL_MIN_WORK else 1)
    args = (m.values, flat, float(p.approx), bool(p.negative_trends))
    if len(blocks) <= 1:
        _mask_block(*args, 0, m.rows, out)
    else:
        futures = [_executor(workers).submit(_mask_block, *args, r0, r1, out) for r0, r1 in blocks]
        for f in futures:
            f.result()
    return out


def supporting_rows(
    m: ExpressionMatrix, c: Chromosome, p: TrendParams, workers: int = 1
) -> list[int]:
    return np.flatnonzero(support_mask(m, c, p, workers)).tolist()


def evaluate_population(
    m: ExpressionMatrix,
    pop: Sequence[Chromosome],
    p: TrendParams,
    workers: int | None = None,
) -> np.ndarray:
    """Count supporting rows for every chromosome in ``pop``.

    Parameters
    ----------
    m : ExpressionMatrix
    pop : sequence of chromosomes
        Each must be valid for ``m``; not re-checked here.
    p : TrendParams
    workers : int, optional
        Number of threads sharing the row range. Defaults to the CPU count.
        The returned counts are identical for every value.

    Returns
    -------
    np.ndarray
        int64 counts in the order of ``pop``.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    if not pop:
        return np.zeros(0, dtype=np.int64)
    flat, offsets = pack_population(pop)
    args = (m.values, flat, offsets, float(p.approx), bool(p.negative_trends))

    parts = workers if m.rows * len(pop) >= _PARALLEL_MIN_WORK else 1
    blocks = _row_blocks(m.rows, parts)
    if len(blocks) <= 1:
        counts = np.zeros(len(pop), dtype=np.int64)
        _count_block(*args, 0, m.rows, counts)
        return counts

    partial = np.zeros((len(blocks), len(pop)), dtype=np.int64)
    pool = _executor(workers)
    futures = [
        pool.submit(_count_block, *args, r0, r1, partial[i])
        for i, (r0, r1) in enumerate(blocks)
    ]
    for f in futures:
        f.result()
    return partial.sum(axis=0)


def fitness(support_count: int, num_cols: int, p: TrendParams) -> float:
    """Score a chromosome: support times a capped exponential column bonus."""
    if support_count < p.min_rows:
        return 0.0
    return float(support_count) * float(2 ** min(num_cols, p.col_cap))
