"""End-to-end acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest summary.
"""
import itertools
import json
import os
import random
import statistics
import time
from dataclasses import replace

import numpy as np
import pytest

from evobic.cli import main
from evobic.core import Bicluster, ExpressionMatrix, cell_jaccard, cell_overlap
from evobic.datagen import SCENARIOS, ScenarioSpec, gen_scenario, scenario_suite
from evobic.evolution import EvolutionParams, init_population, run
from evobic.io import write_biclusters, write_matrix_tsv
from evobic.metrics import clustering_error, hungarian_max
from evobic.trend import TrendParams, evaluate_population, row_supports

pytestmark = pytest.mark.slow


def brute_max_assignment(w):
    w = np.asarray(w)
    if w.shape[0] > w.shape[1]:
        w = w.T
    n_rows, n_cols = w.shape
    perms = np.array(list(itertools.permutations(range(n_cols), n_rows)), dtype=np.int64)
    return int(w[np.arange(n_rows), perms].sum(axis=1).max())


def brute_ce(found, truth):
    # cell multiset union by direct enumeration
    cover_f, cover_t = {}, {}
    for side, cover in ((found, cover_f), (truth, cover_t)):
        for b in side:
            for cell in itertools.product(b.rows, b.cols):
                cover[cell] = cover.get(cell, 0) + 1
    union = sum(max(cover_f.get(c, 0), cover_t.get(c, 0)) for c in cover_f.keys() | cover_t.keys())
    if not found or not truth:
        return 0.0
    shared = [[len(set(itertools.product(f.rows, f.cols)) & set(itertools.product(t.rows, t.cols)))
               for t in truth] for f in found]
    return brute_max_assignment(shared) / union


def search(data, **overrides):
    p = replace(EvolutionParams(), num_biclusters=len(data.truth), **overrides)
    t0 = time.perf_counter()
    found, report = run(data.matrix, p)
    return clustering_error(found, data.truth), time.perf_counter() - t0, report


def test_c1_metric_oracle(acceptance):
    rng = random.Random(2024)

    def random_set():
        return [
            Bicluster(tuple(rng.sample(range(30), rng.randint(1, 12))),
                      tuple(rng.sample(range(30), rng.randint(1, 12))))
            for _ in range(rng.randint(1, 6))
        ]

    pairs = [(random_set(), random_set()) for _ in range(200)]
    t0 = time.perf_counter()
    worst = max(abs(clustering_error(f, t) - brute_ce(f, t)) for f, t in pairs)
    elapsed = time.perf_counter() - t0
    acceptance("C1 metric oracle equivalence", worst <= 1e-12 and elapsed < 10,
               f"max |CE - brute| = {worst:.2e} over 200 pairs, {elapsed:.2f}s")


def test_c2_hungarian(acceptance):
    rng = np.random.default_rng(7)
    cases = [rng.integers(0, 100, size=(rng.integers(1, 8), rng.integers(1, 8))) for _ in range(500)]
    t0 = time.perf_counter()
    mismatches = sum(hungarian_max(w)[1] != brute_max_assignment(w) for w in cases)
    elapsed = time.perf_counter() - t0
    acceptance("C2 Hungarian correctness", mismatches == 0 and elapsed < 10,
               f"{mismatches} mismatches in 500 matrices up to 7x7, {elapsed:.2f}s")


def test_c3_trend_kernel(acceptance):
    rng = np.random.default_rng(3)
    values = rng.standard_normal((1000, 12))
    # a tenth of the rows get ties so the strict comparison is exercised
    values[::10, 1] = values[::10, 0]
    m = ExpressionMatrix(values)
    chromosomes = [tuple(rng.permutation(12)[: rng.integers(2, 9)].tolist()) for _ in range(1000)]
    exact = TrendParams(approx=0.0, min_rows=2)
    loose = TrendParams(approx=0.05, min_rows=2)

    def literal(row, c, approx):
        return all(row[c[i + 1]] > row[c[i]] - approx * abs(row[c[i]]) for i in range(len(c) - 1))

    disagreements = 0
    for r, c in enumerate(chromosomes):
        seq = [values[r, j] for j in c]
        sorted_check = seq == sorted(seq) and len(set(seq)) == len(seq)
        disagreements += row_supports(m, r, c, exact) != sorted_check
        disagreements += row_supports(m, r, c, loose) != literal(values[r], c, 0.05)
        single = ExpressionMatrix(values[r : r + 1])
        disagreements += int(evaluate_population(single, [c], exact, 1)[0]) != sorted_check
        disagreements += int(evaluate_population(single, [c], loose, 1)[0]) != literal(values[r], c, 0.05)
    acceptance("C3 trend-kernel oracle", disagreements == 0,
               f"{disagreements} disagreements over 1000 cases x 2 tolerances x 2 code paths")


def noise_spec(sigma, seed):
    return ScenarioSpec("noise", "trend", 500, 50, 50, 8, noise_sigma=sigma, seed=seed)


def test_c4_single_implant(acceptance):
    results = [search(gen_scenario(noise_spec(0.0, seed))) for seed in range(5)]
    good = sum(ce >= 0.95 and t < 120 for ce, t, _ in results)
    detail = ", ".join(f"CE {ce:.3f} in {t:.1f}s" for ce, t, _ in results)
    acceptance("C4 single-implant recovery", good >= 4, f"{good}/5 replicates pass ({detail})")


def test_c5_noise_curve(acceptance):
    medians = []
    for sigma in (0.0, 0.1, 0.2, 0.3):
        ces = [search(gen_scenario(noise_spec(sigma, seed)))[0] for seed in range(5)]
        medians.append(statistics.median(ces))
    monotone = all(a >= b for a, b in zip(medians, medians[1:]))
    acceptance("C5 noise curve", monotone and medians[0] >= 0.95,
               "median CE by sigma 0/0.1/0.2/0.3: " + " / ".join(f"{m:.3f}" for m in medians))


def test_c6_colincrease(acceptance):
    # the column bonus must not saturate before the implant width
    trend = TrendParams(col_cap=64)
    medians = {}
    for width in (10, 30, 60):
        ces = []
        for seed in range(5):
            spec = ScenarioSpec("colincrease", "trend", 500, 120, 50, width, seed=seed)
            ces.append(search(gen_scenario(spec), trend=trend)[0])
        medians[width] = statistics.median(ces)
    ok = all(m >= 0.85 for m in medians.values())
    acceptance("C6 colincrease robustness", ok,
               "median CE by width: " + ", ".join(f"{w}: {m:.3f}" for w, m in medians.items()))


def test_c7_determinism(acceptance, tmp_path):
    data = gen_scenario(noise_spec(0.0, 11))
    matrix = tmp_path / "m.tsv"
    write_matrix_tsv(matrix, data.matrix)
    outputs = {}
    for name, threads in (("first", "1"), ("second", "1"), ("eight", "8")):
        out = tmp_path / f"{name}.json"
        assert main(["run", "-i", str(matrix), "-o", str(out), "--seed", "99",
                     "--threads", threads, "-b", "1"]) == 0
        outputs[name] = out.read_bytes()
    same = len(set(outputs.values())) == 1
    found = json.loads(outputs["first"])["biclusters"]
    acceptance("C7 determinism", same and bool(found),
               f"repeat and --threads 1 vs 8 outputs identical: {same}")


def test_c8_parallel_scaling(acceptance):
    m = ExpressionMatrix(np.random.default_rng(8).standard_normal((20000, 250)))
    p = EvolutionParams(seed=8)
    pop = init_population(p, m.cols)
    evaluate_population(m, pop, p.trend, 1)  # compile and warm caches

    def best_time(workers):
        times, out = [], None
        for _ in range(5):
            t0 = time.perf_counter()
            out = evaluate_population(m, pop, p.trend, workers)
            times.append(time.perf_counter() - t0)
        return min(times), out

    t1, out1 = best_time(1)
    t8, out8 = best_time(8)
    identical = np.array_equal(out1, out8)
    speedup = t1 / t8
    acceptance("C8 parallel scaling", identical and speedup >= 3.0,
               f"speedup {speedup:.2f}x at 8 workers ({t1 * 1e3:.1f} ms vs {t8 * 1e3:.1f} ms), "
               f"outputs identical: {identical}, cpu_count={os.cpu_count()}")


def test_c9_convergence(acceptance):
    spec = ScenarioSpec("six_types", "trend", 100, 20, 30, 6, seed=9)
    data = gen_scenario(spec)
    p = replace(EvolutionParams(), num_biclusters=1, max_iterations=20000)
    found, report = run(data.matrix, p)
    ce = clustering_error(found, data.truth)
    ok = report.termination == "converged" and report.generations < 20000
    acceptance("C9 convergence machinery", ok,
               f"termination={report.termination} after {report.generations} generations, CE {ce:.3f}")


def test_c10_generator_consistency(acceptance, tmp_path, capsys):
    checked, problems = 0, []
    overlap_9x9 = None
    for scenario in SCENARIOS:
        for case, spec in scenario_suite(scenario):
            if spec.noise_sigma > 0:
                continue
            data = gen_scenario(spec)
            truth = tmp_path / f"{case}.json"
            write_biclusters(truth, data.truth)
            capsys.readouterr()
            code = main(["eval", "--found", str(truth), "--truth", str(truth)])
            ce = json.loads(capsys.readouterr().out)["ce"] if code == 0 else None
            if ce != 1.0:
                problems.append(f"{case}: CE {ce}")
            for a, b in itertools.combinations(data.truth, 2):
                if spec.overlap_cells != (0, 0) and spec.scenario in ("overlap", "large_variant"):
                    ro, co = spec.overlap_cells
                    if cell_overlap(a, b) != ro * co:
                        problems.append(f"{case}: intersection {cell_overlap(a, b)} != {ro * co}")
                    if case == "overlap_9x9":
                        overlap_9x9 = cell_overlap(a, b)
                elif cell_jaccard(a, b) != 0.0:
                    problems.append(f"{case}: truth Jaccard {cell_jaccard(a, b)}")
            checked += 1
    ok = not problems and overlap_9x9 == 81
    acceptance("C10 generator self-consistency", ok,
               f"{checked} noiseless cases, overlap_9x9 intersection {overlap_9x9} cells"
               + (f", problems: {problems}" if problems else ""))
