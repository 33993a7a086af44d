"""File formats: matrix TSV, bicluster JSON/text, run reports, results CSV."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import Bicluster, BiclusterSet, ExpressionMatrix, ValidationError

RESULTS_HEADER = (
    "dataset_path", "scenario", "replicate", "ce", "recovery", "relevance",
    "wall_time_seconds", "generations", "termination",
)


class ParseError(ValueError):
    """Malformed input file. ``line`` and ``column`` are 1-based when known."""

    def __init__(self, path, message: str, line: int | None = None, column: int | None = None):
        where = f"{path}"
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line
        self.column = column


# --------------------------------------------------------------------------
# matrix TSV
# --------------------------------------------------------------------------

def write_matrix_tsv(path, m: ExpressionMatrix) -> None:
    """Header row of column labels (after an empty corner cell), then one
    line per row: label followed by values in shortest round-trip form."""
    with open(path, "w", newline="\n") as fh:
        fh.write("\t".join([""] + m.col_labels) + "\n")
        for label, row in zip(m.row_labels, m.values.tolist()):
            fh.write(label + "\t" + "\t".join(map(repr, row)) + "\n")


def parse_matrix_tsv(path) -> ExpressionMatrix:
    with open(path) as fh:
        header = fh.readline().rstrip("\r\n")
        if not header:
            raise ParseError(path, "empty file or missing header row", 1)
        col_labels = header.split("\t")[1:]
        width = len(col_labels) + 1
        if not col_labels:
            raise ParseError(path, "header row has no column labels", 1)

        row_labels: list[str] = []
        rows: list[np.ndarray] = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != width:
                raise ParseError(
                    path, f"expected {width} fields, found {len(cells)}", lineno
                )
            try:
                values = np.array(cells[1:], dtype=np.float64)
            except ValueError:
                for j, cell in enumerate(cells[1:], start=2):
                    try:
                        float(cell)
                    except ValueError:
                        raise ParseError(path, f"not a number: {cell!r}", lineno, j) from None
                raise
            if not np.isfinite(values).all():
                j = int(np.flatnonzero(~np.isfinite(values))[0]) + 2
                raise ParseError(path, f"non-finite value {cells[j - 1]!r}", lineno, j)
            row_labels.append(cells[0])
            rows.append(values)

    if not rows:
        raise ParseError(path, "no data rows")
    try:
        return ExpressionMatrix(np.vstack(rows), row_labels, col_labels)
    except ValidationError as exc:
        raise ParseError(path, str(exc)) from None


# --------------------------------------------------------------------------
# biclusters
# --------------------------------------------------------------------------

def biclusters_to_json(biclusters: Sequence[Bicluster]) -> str:
    payload = {"biclusters": [{"rows": list(b.rows), "cols": list(b.cols)} for b in biclusters]}
    return json.dumps(payload) + "\n"


def write_biclusters(path, biclusters: Sequence[Bicluster]) -> None:
    Path(path).write_text(biclusters_to_json(biclusters))


def _check_shape(path, biclusters, shape):
    if shape is None:
        return
    for k, b in enumerate(biclusters):
        try:
            b.check_bounds(*shape)
        except ValidationError as exc:
            raise ParseError(path, f"bicluster {k}: {exc}") from None


def _parse_text_dialect(path, text: str) -> BiclusterSet:
    out: BiclusterSet = []
    stanza: dict[str, list[int]] = {}
    start = 1

    def flush(lineno):
        if not stanza:
            return
        if set(stanza) != {"rows", "cols"}:
            raise ParseError(path, "stanza needs one 'rows:' and one 'cols:' line", start)
        try:
            out.append(Bicluster(tuple(stanza["rows"]), tuple(stanza["cols"])))
        except ValidationError as exc:
            raise ParseError(path, str(exc), start) from None
        stanza.clear()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            flush(lineno)
            continue
        key, sep, rest = line.partition(":")
        key = key.strip().lower()
        if not sep or key not in ("rows", "cols"):
            raise ParseError(path, f"expected 'rows:' or 'cols:', got {raw!r}", lineno)
        if key in stanza:
            # a repeated key starts the next stanza even without a blank line
            flush(lineno)
        if not stanza:
            start = lineno
        try:
            stanza[key] = [int(tok) for tok in rest.split()]
        except ValueError:
            raise ParseError(path, f"non-integer index in {raw!r}", lineno) from None
    flush(None)
    return out


def parse_biclusters(path, shape: tuple[int, int] | None = None) -> BiclusterSet:
    """Read canonical JSON or the plain-text stanza dialect.

    When ``shape`` is given, indices outside it are rejected.
    """
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            payload = json.loads(text)
            items = payload["biclusters"]
            biclusters = [Bicluster(tuple(b["rows"]), tuple(b["cols"])) for b in items]
        except json.JSONDecodeError as exc:
            raise ParseError(path, f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None
        except (KeyError, TypeError) as exc:
            raise ParseError(path, f"unexpected JSON structure: {exc}") from None
        except ValidationError as exc:
            raise ParseError(path, str(exc)) from None
    else:
        biclusters = _parse_text_dialect(path, text)
    _check_shape(path, biclusters, shape)
    return biclusters


def report_path(out_path) -> Path:
    """``res.json`` -> ``res.report.json``."""
    out_path = Path(out_path)
    stem = out_path.name[:-5] if out_path.name.endswith(".json") else out_path.name
    return out_path.with_name(stem + ".report.json")


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# benchmark results
# --------------------------------------------------------------------------

@dataclass
class BenchRecord:
    dataset_path: str
    scenario: str
    replicate: int
    ce: float | None
    recovery: float | None
    relevance: float | None
    wall_time_seconds: float
    generations: int
    termination: str

    def __post_init__(self):
        for name in ("ce", "recovery", "relevance"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name}={v} outside [0, 1]")
        if self.wall_time_seconds < 0:
            raise ValidationError("negative wall time")
        if self.termination not in ("converged", "budget"):
            raise ValidationError(f"unknown termination {self.termination!r}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_results_csv(path, records: Iterable[BenchRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for r in records:
            writer.writerow([_fmt(getattr(r, name)) for name in RESULTS_HEADER])


def read_results_csv(path) -> list[BenchRecord]:
    def opt_float(s):
        return float(s) if s != "" else None

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULTS_HEADER:
            raise ParseError(path, f"unexpected header {reader.fieldnames}", 1)
        return [
            BenchRecord(
                dataset_path=row["dataset_path"],
                scenario=row["scenario"],
                replicate=int(row["replicate"]),
                ce=opt_float(row["ce"]),
                recovery=opt_float(row["recovery"]),
                relevance=opt_float(row["relevance"]),
                wall_time_seconds=float(row["wall_time_seconds"]),
                generations=int(row["generations"]),
                termination=row["termination"],
            )
            for row in reader
        ]


SUMMARY_HEADER = ("scenario", "datasets", "failed", "median_ce", "mean_ce", "mean_wall_time_seconds")


def summarize(records: Sequence[BenchRecord]) -> list[dict]:
    groups: dict[str, list[BenchRecord]] = {}
    for r in records:
        groups.setdefault(r.scenario, []).append(r)
    rows = []
    for scenario, recs in groups.items():
        ces = [r.ce for r in recs if r.ce is not None]
        rows.append({
            "scenario": scenario,
            "datasets": len(recs),
            "failed": len(recs) - len(ces),
            "median_ce": float(np.median(ces)) if ces else math.nan,
            "mean_ce": float(np.mean(ces)) if ces else math.nan,
            "mean_wall_time_seconds": float(np.mean([r.wall_time_seconds for r in recs])),
        })
    return rows


def write_summary_csv(path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
