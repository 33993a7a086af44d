"""Synthetic benchmark matrices with implanted biclusters.

Two families of scenarios are covered. The first has six pattern types,
overlapping biclusters and narrow biclusters; the second has background
noise, growing bicluster width, growing matrix width, shifted bicluster
means and 20,000-row variants. Every dataset is a pure function of its
:class:`ScenarioSpec`, seed included.

Three independent random streams are derived from the seed: background
values, implant placement and pattern values, and additive noise. The noise
stream is drawn the same way for every sigma, so two datasets that differ
only in ``noise_sigma`` differ only in noise magnitude.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import Bicluster, BiclusterSet, ExpressionMatrix, ValidationError

SCENARIOS = (
    "six_types", "overlap", "narrow", "noise", "colincrease",
    "colin1000", "different", "large_variant",
)
PATTERNS = ("trend", "column_const", "row_const", "shift", "scale", "shift_scale")


class PlacementError(ValueError):
    """Implants do not fit into the matrix as requested."""


@dataclass(frozen=True)
class PatternParams:
    noise_sigma: float = 0.0
    mean_shift: float = 0.0
    shift_sd: float = 1.0
    scale_low: float = 0.5
    scale_high: float = 2.0


@dataclass(frozen=True)
class ScenarioSpec:
    """One synthetic test case.

    ``bic_rows`` and ``bic_cols`` are either one size shared by all
    ``num_biclusters`` implants or a tuple with one size per implant.
    ``overlap_cells`` is the (rows, cols) block shared by consecutive
    implants; it is only honoured by the ``overlap`` and ``large_variant``
    scenarios.
    ``placement_cols`` restricts where implant columns may go, so widening
    the matrix keeps implants in place.
    """

    scenario: str = "six_types"
    pattern: str = "trend"
    matrix_rows: int = 300
    matrix_cols: int = 200
    bic_rows: int | tuple[int, ...] = 30
    bic_cols: int | tuple[int, ...] = 30
    num_biclusters: int = 1
    overlap_cells: tuple[int, int] = (0, 0)
    noise_sigma: float = 0.0
    mean_shift: float = 0.0
    seed: int = 0
    placement_cols: int | None = None

    def __post_init__(self):
        for name in ("bic_rows", "bic_cols"):
            v = getattr(self, name)
            if not isinstance(v, int):
                object.__setattr__(self, name, tuple(int(x) for x in v))
        object.__setattr__(self, "overlap_cells", tuple(int(x) for x in self.overlap_cells))
        if self.scenario not in SCENARIOS:
            raise ValidationError(f"unknown scenario {self.scenario!r}")
        if self.pattern not in PATTERNS:
            raise ValidationError(f"unknown pattern {self.pattern!r}")
        if self.num_biclusters < 1:
            raise ValidationError("num_biclusters must be >= 1")
        if self.noise_sigma < 0 or self.mean_shift < 0:
            raise ValidationError("noise_sigma and mean_shift must be >= 0")
        rows, cols = self.sizes()
        span = self.placement_cols or self.matrix_cols
        if span > self.matrix_cols:
            raise ValidationError("placement_cols exceeds matrix_cols")
        if max(rows) > self.matrix_rows or max(cols) > span:
            raise ValidationError(
                f"bicluster larger than the {self.matrix_rows}x{span} placement area"
            )
        if min(rows) < 1 or min(cols) < 2:
            raise ValidationError("biclusters need >= 1 row and >= 2 columns")
        ro, co = self.overlap_cells
        if ro > min(rows) or co > min(cols) or ro < 0 or co < 0:
            raise ValidationError("overlap_cells must fit inside the biclusters")

    def sizes(self) -> tuple[list[int], list[int]]:
        def expand(v):
            if isinstance(v, int):
                return [v] * self.num_biclusters
            if len(v) != self.num_biclusters:
                raise ValidationError(f"{len(v)} sizes for {self.num_biclusters} biclusters")
            return list(v)

        return expand(self.bic_rows), expand(self.bic_cols)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("bic_rows", "bic_cols", "overlap_cells"):
            if isinstance(d[k], tuple):
                d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        d = dict(d)
        for k in ("bic_rows", "bic_cols"):
            if isinstance(d.get(k), list):
                d[k] = tuple(d[k])
        if "overlap_cells" in d:
            d["overlap_cells"] = tuple(d["overlap_cells"])
        return cls(**d)


@dataclass
class GeneratedDataset:
    matrix: ExpressionMatrix
    truth: BiclusterSet
    spec: ScenarioSpec
    # generating column order of each implant, same order as truth
    orders: list[tuple[int, ...]] = field(default_factory=list)


def _labels(rows: int, cols: int) -> tuple[list[str], list[str]]:
    return [f"g{i}" for i in range(rows)], [f"c{j}" for j in range(cols)]


def gen_background(rows: int, cols: int, seed: int) -> ExpressionMatrix:
    """Standard-normal background matrix."""
    values = np.random.default_rng(seed).standard_normal((rows, cols))
    return ExpressionMatrix(values, *_labels(rows, cols))


def _fill_pattern(
    values: np.ndarray,
    pattern: str,
    rows: Sequence[int],
    cols: Sequence[int],
    params: PatternParams,
    rng: np.random.Generator,
) -> tuple[int, ...]:
    """Overwrite ``values[rows][:, cols]`` in place; return the column order."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    nr, nc = len(rows), len(cols)
    order = rng.permutation(cols)

    if pattern == "trend":
        block = np.sort(rng.standard_normal((nr, nc)), axis=1)
        # the k-th column of the order receives each row's k-th smallest value
        rank = {int(c): k for k, c in enumerate(order)}
        sub = block[:, [rank[int(c)] for c in cols]]
    elif pattern == "column_const":
        sub = np.tile(rng.standard_normal(nc), (nr, 1))
    elif pattern == "row_const":
        sub = np.tile(rng.standard_normal((nr, 1)), (1, nc))
    else:
        base = rng.standard_normal(nc)
        offsets = rng.normal(0.0, params.shift_sd, (nr, 1))
        factors = rng.uniform(params.scale_low, params.scale_high, (nr, 1))
        if pattern == "shift":
            sub = base + offsets
        elif pattern == "scale":
            sub = base * factors
        elif pattern == "shift_scale":
            sub = base * factors + offsets
        else:
            raise ValidationError(f"unknown pattern {pattern!r}")

    noise = rng.standard_normal((nr, nc))
    sub = sub + params.noise_sigma * noise + params.mean_shift
    values[np.ix_(rows, cols)] = sub
    return tuple(int(c) for c in order)


def implant_pattern(
    m: ExpressionMatrix,
    pattern: str,
    rows: Sequence[int],
    cols: Sequence[int],
    params: PatternParams = PatternParams(),
    rng: np.random.Generator | None = None,
) -> tuple[ExpressionMatrix, Bicluster]:
    """Return a copy of ``m`` with ``pattern`` written into rows x cols.

    For ``trend`` every implanted row increases along one random column
    order shared by the whole implant.
    """
    rng = np.random.default_rng() if rng is None else rng
    b = Bicluster(tuple(rows), tuple(cols))
    b.check_bounds(m.rows, m.cols)
    values = np.array(m.values)
    _fill_pattern(values, pattern, rows, cols, params, rng)
    return ExpressionMatrix(values, m.row_labels, m.col_labels), b


def _place(spec: ScenarioSpec, rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
    row_sizes, col_sizes = spec.sizes()
    span = spec.placement_cols or spec.matrix_cols
    placements = []
    used_rows: set[int] = set()
    used_cols: set[int] = set()
    overlap = spec.scenario in ("overlap", "large_variant") and spec.overlap_cells != (0, 0)
    ro, co = spec.overlap_cells if overlap else (0, 0)

    for k in range(spec.num_biclusters):
        nr, nc = row_sizes[k], col_sizes[k]
        if k > 0 and overlap:
            prev_rows, prev_cols = placements[-1]
            # share only rows/cols that the previous implant did not inherit,
            # so implants k and k+2 stay disjoint
            own_rows = prev_rows[ro:] if k > 1 else prev_rows
            own_cols = prev_cols[co:] if k > 1 else prev_cols
            if len(own_rows) < ro or len(own_cols) < co:
                raise PlacementError("implants too small for the requested overlap chain")
            shared_r = rng.choice(own_rows, ro, replace=False)
            shared_c = rng.choice(own_cols, co, replace=False)
            free_r = np.setdiff1d(np.arange(spec.matrix_rows), sorted(used_rows))
            free_c = np.setdiff1d(np.arange(span), sorted(used_cols))
            if len(free_r) < nr - ro or len(free_c) < nc - co:
                raise PlacementError("not enough free rows/columns for overlapping implants")
            rows = np.concatenate([shared_r, rng.choice(free_r, nr - ro, replace=False)])
            cols = np.concatenate([shared_c, rng.choice(free_c, nc - co, replace=False)])
        elif overlap:
            rows = rng.choice(spec.matrix_rows, nr, replace=False)
            cols = rng.choice(span, nc, replace=False)
        else:
            # disjoint row sets make implants cell-disjoint whatever their columns
            free_r = np.setdiff1d(np.arange(spec.matrix_rows), sorted(used_rows))
            if len(free_r) < nr:
                raise PlacementError(
                    f"implant {k} needs {nr} rows, only {len(free_r)} unused rows remain"
                )
            rows = rng.choice(free_r, nr, replace=False)
            cols = rng.choice(span, nc, replace=False)
        used_rows.update(int(r) for r in rows)
        used_cols.update(int(c) for c in cols)
        placements.append((rows, cols))
    return placements


def gen_scenario(spec: ScenarioSpec) -> GeneratedDataset:
    bg_seq, implant_seq, noise_seq = np.random.SeedSequence(spec.seed).spawn(3)
    values = np.random.default_rng(bg_seq).standard_normal((spec.matrix_rows, spec.matrix_cols))
    rng = np.random.default_rng(implant_seq)
    params = PatternParams(mean_shift=spec.mean_shift)

    truth, orders = [], []
    for rows, cols in _place(spec, rng):
        orders.append(_fill_pattern(values, spec.pattern, rows, cols, params, rng))
        truth.append(Bicluster(tuple(rows.tolist()), tuple(cols.tolist())))

    if spec.noise_sigma > 0:
        noise = np.random.default_rng(noise_seq).standard_normal(values.shape)
        values += spec.noise_sigma * noise

    matrix = ExpressionMatrix(values, *_labels(spec.matrix_rows, spec.matrix_cols))
    return GeneratedDataset(matrix, truth, spec, orders)


def replicate_suite(spec: ScenarioSpec, n_replicates: int) -> list[GeneratedDataset]:
    if n_replicates < 1:
        raise ValidationError("n_replicates must be >= 1")
    return [gen_scenario(replace(spec, seed=spec.seed + i)) for i in range(n_replicates)]


def default_spec(scenario: str, seed: int = 0) -> ScenarioSpec:
    """Representative single dataset of ``scenario``.

    For ``narrow`` this is the combined dataset holding all three widths;
    the suite splits them into one test case per width.
    """
    if scenario == "narrow":
        return ScenarioSpec(
            "narrow", "trend", 1000, 100, 100, (10, 20, 30), 3, seed=seed,
        )
    return scenario_suite(scenario, seed)[0][1]


# per scenario: fixed fields, then the fields that vary between test cases
_SUITES: dict[str, tuple[dict, list[dict]]] = {
    "six_types": (
        dict(matrix_rows=300, matrix_cols=200),
        [dict(pattern=pt, bic_rows=k, bic_cols=k) for pt in PATTERNS for k in (10, 20, 30)],
    ),
    "overlap": (
        dict(matrix_rows=100, matrix_cols=100, bic_rows=25, bic_cols=25, num_biclusters=2),
        [dict(overlap_cells=(k, k)) for k in (0, 3, 6, 9)],
    ),
    "narrow": (
        dict(matrix_rows=1000, matrix_cols=100, bic_rows=100),
        [dict(bic_cols=w) for w in (10, 20, 30)],
    ),
    "noise": (
        dict(matrix_rows=500, matrix_cols=50, bic_rows=50, bic_cols=8),
        [dict(noise_sigma=s) for s in (0.0, 0.1, 0.2, 0.3)],
    ),
    "colincrease": (
        dict(matrix_rows=500, matrix_cols=200, bic_rows=50),
        [dict(bic_cols=w) for w in (15, 30, 60, 120)],
    ),
    "colin1000": (
        dict(matrix_rows=500, bic_rows=50, bic_cols=10, num_biclusters=2, placement_cols=500),
        [dict(matrix_cols=c) for c in (500, 1000, 1500, 2000)],
    ),
    "different": (
        dict(matrix_rows=500, matrix_cols=50, bic_rows=50, bic_cols=8),
        [dict(mean_shift=mu) for mu in (0.0, 2.0, 4.0, 6.0)],
    ),
    "large_variant": (
        dict(matrix_rows=20000, matrix_cols=250, bic_rows=200),
        [
            dict(bic_cols=30),
            dict(bic_cols=25, num_biclusters=2, overlap_cells=(9, 9)),
            dict(bic_cols=10, mean_shift=3.0),
            dict(bic_cols=10, noise_sigma=0.1),
            dict(bic_cols=60),
        ],
    ),
}
_LARGE_NAMES = ("six_types", "overlap", "different", "noise", "colincrease")


def _case_name(scenario: str, varying: dict, index: int) -> str:
    if scenario == "large_variant":
        return f"large_{_LARGE_NAMES[index]}"

    def fmt(v):
        return "x".join(map(str, v)) if isinstance(v, tuple) else str(v)

    parts = [fmt(v) for k, v in varying.items() if k != "bic_rows"]
    return "_".join([scenario] + parts)


def scenario_suite(scenario: str, seed: int = 0, **overrides) -> list[tuple[str, ScenarioSpec]]:
    """All test cases of ``scenario`` as ``(case_name, spec)`` pairs.

    ``overrides`` replace spec fields in every case. Overriding a field that
    distinguishes the cases (``noise_sigma`` for ``noise``, say) collapses
    the suite to the cases that remain distinct.
    """
    if scenario not in _SUITES:
        raise ValidationError(f"unknown scenario {scenario!r}")
    fixed, variants = _SUITES[scenario]
    cases = []
    seen = set()
    for i, varying in enumerate(variants):
        varying = {k: overrides.get(k, v) for k, v in varying.items()}
        fields_ = {**fixed, **varying, **overrides}
        spec = ScenarioSpec(**{"scenario": scenario, "seed": seed, **fields_})
        key = repr(spec)
        if key in seen:
            continue
        seen.add(key)
        cases.append((_case_name(scenario, varying, i), spec))
    return cases
