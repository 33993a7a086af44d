"""Benchmark trees: writing generated scenarios to disk and sweeping them.

A tree root holds ``manifest.json`` plus one directory per dataset::

    ROOT/manifest.json
    ROOT/<scenario>/<case>/rep<k>/matrix.tsv
    ROOT/<scenario>/<case>/rep<k>/truth.json
"""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .datagen import gen_scenario, scenario_suite
from .evolution import EvolutionParams, run
from .io import BenchRecord, parse_biclusters, parse_matrix_tsv, write_biclusters, write_matrix_tsv
from .metrics import clustering_error, recovery, relevance

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"


def _read_manifest(root: Path) -> dict:
    path = root / MANIFEST
    if path.exists():
        return json.loads(path.read_text())
    return {"datasets": [], "files": []}


def generate_tree(
    scenario: str, root, replicates: int = 5, seed: int = 0, **overrides
) -> dict:
    """Write every case x replicate of ``scenario`` under ``root``.

    An existing manifest is kept, with earlier entries for the same scenario
    replaced. Returns the manifest that was written.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    manifest = _read_manifest(root)
    datasets = [d for d in manifest["datasets"] if d["scenario"] != scenario]

    for case, spec in scenario_suite(scenario, seed, **overrides):
        for rep in range(replicates):
            rep_spec = replace(spec, seed=spec.seed + rep)
            data = gen_scenario(rep_spec)
            rel = Path(scenario) / case / f"rep{rep}"
            (root / rel).mkdir(parents=True, exist_ok=True)
            write_matrix_tsv(root / rel / "matrix.tsv", data.matrix)
            write_biclusters(root / rel / "truth.json", data.truth)
            datasets.append({
                "scenario": scenario,
                "case": case,
                "replicate": rep,
                "matrix": (rel / "matrix.tsv").as_posix(),
                "truth": (rel / "truth.json").as_posix(),
                "spec": rep_spec.to_dict(),
            })
            log.info("wrote %s", rel)

    manifest = {
        "datasets": datasets,
        "files": sorted(f for d in datasets for f in (d["matrix"], d["truth"])),
    }
    (root / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def find_datasets(root) -> list[dict]:
    """All manifest entries below ``root``, with paths made absolute."""
    root = Path(root)
    out = []
    for manifest_path in sorted(root.rglob(MANIFEST)):
        base = manifest_path.parent
        for d in json.loads(manifest_path.read_text())["datasets"]:
            d = dict(d)
            d["matrix"] = str(base / d["matrix"])
            d["truth"] = str(base / d["truth"])
            out.append(d)
    return out


def bench_dataset(
    entry: dict, params: EvolutionParams, workers: int | None = 1, match_truth_count: bool = True
) -> BenchRecord:
    """Run the search on one dataset and score it against its ground truth.

    The recorded wall time covers loading, searching and scoring. Any
    failure is recorded with blank metrics instead of being raised.
    """
    t0 = time.perf_counter()
    dataset = str(Path(entry["matrix"]).parent)
    group = f"{entry['scenario']}/{entry['case']}"
    try:
        m = parse_matrix_tsv(entry["matrix"])
        truth = parse_biclusters(entry["truth"], m.shape)
        p = params
        if match_truth_count and truth:
            p = replace(params, num_biclusters=len(truth))
        found, report = run(m, p, workers)
        ce = clustering_error(found, truth)
        rec = recovery(found, truth) if truth else None
        rel = relevance(found, truth) if found else None
        return BenchRecord(
            dataset_path=dataset,
            scenario=group,
            replicate=int(entry["replicate"]),
            ce=ce,
            recovery=rec,
            relevance=rel,
            wall_time_seconds=time.perf_counter() - t0,
            generations=report.generations,
            termination=report.termination,
        )
    except Exception as exc:  # one bad dataset must not abort the sweep
        log.error("%s failed: %s", dataset, exc)
        return BenchRecord(
            dataset_path=dataset,
            scenario=group,
            replicate=int(entry.get("replicate", 0)),
            ce=None,
            recovery=None,
            relevance=None,
            wall_time_seconds=time.perf_counter() - t0,
            generations=0,
            termination="budget",
        )


def run_bench(
    root,
    params: EvolutionParams,
    workers: int | None = 1,
    jobs: int = 1,
    match_truth_count: bool = True,
) -> list[BenchRecord]:
    """Benchmark every dataset under ``root``; records come back in manifest order."""
    entries = find_datasets(root)
    if jobs <= 1:
        return [bench_dataset(e, params, workers, match_truth_count) for e in entries]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(bench_dataset, e, params, workers, match_truth_count) for e in entries]
        return [f.result() for f in futures]
