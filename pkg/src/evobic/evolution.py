"""Evolutionary search for trend-preserving biclusters.

One generation:

1. seed the next population with the best chromosomes of the top-rank list;
2. fill it with offspring: a tournament picks the parent (scores are
   penalized for columns crowded in the current population), a weighted draw
   picks the operator, and any child already seen is rejected as a tabu hit
   and retried;
3. score all new offspring in one batch and offer them to the top-rank list.

The run stops after ``max_iterations`` generations or when the number of
tabu hits since the top-rank list last changed reaches the threshold.

All randomness comes from a single ``random.Random`` owned by the state.
Per offspring attempt the draws are, in order: the parent tournament, one
``random()`` for the operator, a second tournament for crossover, then the
operator's own draws. Fitness evaluation consumes no randomness.
"""
from __future__ import annotations

import bisect
import logging
import random
import time
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Sequence

from .core import (
    Bicluster,
    BiclusterSet,
    Chromosome,
    ExpressionMatrix,
    ValidationError,
    cell_jaccard,
    chromosome_hash,
)
from .trend import TrendParams, evaluate_population, fitness, supporting_rows

log = logging.getLogger(__name__)

OPERATORS = ("insertion", "deletion", "substitution", "swap", "crossover")
DEFAULT_OPERATOR_WEIGHTS = (0.3, 0.1, 0.25, 0.15, 0.2)


@dataclass(frozen=True)
class EvolutionParams:
    population_size: int = 400
    elite_count: int = 8
    max_iterations: int = 20000
    num_biclusters: int = 3
    # None means one full generation's worth of hits: population_size
    tabu_hits_threshold: int | None = None
    tournament_size: int = 8
    operator_weights: tuple[float, ...] = DEFAULT_OPERATOR_WEIGHTS
    penalty_base: float = 1.01
    overlap_threshold: float = 0.75
    init_len_min: int = 3
    init_len_max: int = 5
    # operators never shrink a chromosome below this many columns
    min_cols: int = 3
    seed: int = 42
    trend: TrendParams = field(default_factory=TrendParams)
    retry_budget: int = 3

    def __post_init__(self):
        if self.tabu_hits_threshold is None:
            object.__setattr__(self, "tabu_hits_threshold", self.population_size)
        object.__setattr__(self, "operator_weights", tuple(float(w) for w in self.operator_weights))
        if not 0 < self.elite_count < self.population_size:
            raise ValidationError("need 0 < elite_count < population_size")
        if len(self.operator_weights) != len(OPERATORS):
            raise ValidationError(f"expected {len(OPERATORS)} operator weights")
        if min(self.operator_weights) < 0 or sum(self.operator_weights) <= 0:
            raise ValidationError("operator weights must be nonnegative, not all zero")
        if self.init_len_min < 2 or self.init_len_max < self.init_len_min:
            raise ValidationError("need 2 <= init_len_min <= init_len_max")
        if not 2 <= self.min_cols <= self.init_len_min:
            raise ValidationError("need 2 <= min_cols <= init_len_min")
        if self.penalty_base <= 1.0:
            raise ValidationError("penalty_base must be > 1")
        if not 0.0 <= self.overlap_threshold <= 1.0:
            raise ValidationError("overlap_threshold must be in [0, 1]")
        if self.max_iterations < 0 or self.num_biclusters < 1:
            raise ValidationError("max_iterations >= 0 and num_biclusters >= 1 required")
        if self.tournament_size < 1 or self.retry_budget < 1:
            raise ValidationError("tournament_size and retry_budget must be >= 1")

    @property
    def top_rank_capacity(self) -> int:
        return max(3 * self.num_biclusters, self.elite_count)


@dataclass
class TabuList:
    seen: set[int] = field(default_factory=set)
    hit_count: int = 0
    total_hits: int = 0

    def __contains__(self, digest: int) -> bool:
        return digest in self.seen

    def add(self, digest: int) -> None:
        self.seen.add(digest)

    def hit(self) -> None:
        self.hit_count += 1
        self.total_hits += 1

    def reset_hits(self) -> None:
        self.hit_count = 0


@dataclass(frozen=True)
class RankedIndividual:
    chromosome: Chromosome
    score: float
    support_count: int
    # supporting rows, filled lazily when the individual reaches the top-rank list
    rows: tuple[int, ...] | None = field(default=None, compare=False)


def rank_key(ind: RankedIndividual):
    """Sort key: higher score first, then fewer columns, then lexicographic."""
    return (-ind.score, len(ind.chromosome), ind.chromosome)


@dataclass
class TopRankList:
    """Best-so-far archive with no two entries overlapping too much."""

    capacity: int
    entries: list[RankedIndividual] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def best_score(self) -> float:
        return self.entries[0].score if self.entries else 0.0

    def offer(self, ind: RankedIndividual, m: ExpressionMatrix, p: EvolutionParams) -> bool:
        """Insert ``ind`` if it earns a place; return whether it did."""
        if ind.score <= 0:
            return False
        key = rank_key(ind)
        if len(self.entries) >= self.capacity and key >= rank_key(self.entries[-1]):
            return False
        if ind.rows is None:
            ind = RankedIndividual(
                ind.chromosome,
                ind.score,
                ind.support_count,
                tuple(supporting_rows(m, ind.chromosome, p.trend)),
            )
        candidate = Bicluster(ind.rows, ind.chromosome)

        displaced = []
        for i, entry in enumerate(self.entries):
            other = Bicluster(entry.rows, entry.chromosome)
            if cell_jaccard(candidate, other) >= p.overlap_threshold:
                if rank_key(entry) <= key:
                    return False
                displaced.append(i)
        for i in reversed(displaced):
            del self.entries[i]

        pos = bisect.bisect_left([rank_key(e) for e in self.entries], key)
        if pos >= self.capacity:
            return False
        self.entries.insert(pos, ind)
        del self.entries[self.capacity:]
        return True

    def copy(self) -> "TopRankList":
        return TopRankList(self.capacity, list(self.entries))


def update_top_rank(
    top: TopRankList, ind: RankedIndividual, m: ExpressionMatrix, p: EvolutionParams
) -> TopRankList:
    """Functional form of :meth:`TopRankList.offer`; ``top`` is left untouched."""
    new = top.copy()
    new.offer(ind, m, p)
    return new


@dataclass
class EvolutionState:
    generation: int
    population: list[Chromosome]
    support: list[int]
    scores: list[float]
    top_rank: TopRankList
    tabu: TabuList
    column_usage: list[int]
    rng: random.Random
    evaluations: int = 0

    def ranked(self) -> list[RankedIndividual]:
        return [
            RankedIndividual(c, s, n)
            for c, s, n in zip(self.population, self.scores, self.support)
        ]


@dataclass
class RunReport:
    generations: int
    wall_time_seconds: float
    termination: str  # "converged" or "budget"
    best_score: float
    tabu_hits_total: int
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "generations": self.generations,
            "wall_time_seconds": self.wall_time_seconds,
            "termination": self.termination,
            "best_score": self.best_score,
            "tabu_hits_total": self.tabu_hits_total,
            "evaluations": self.evaluations,
        }


# --------------------------------------------------------------------------
# genetic operators
# --------------------------------------------------------------------------

def _absent_column(c: Chromosome, num_cols: int, rng: random.Random) -> int | None:
    if len(c) >= num_cols:
        return None
    if 2 * len(c) < num_cols:
        present = set(c)
        while True:
            col = rng.randrange(num_cols)
            if col not in present:
                return col
    present = set(c)
    return rng.choice([j for j in range(num_cols) if j not in present])


def random_chromosome(
    num_cols: int, len_min: int, len_max: int, rng: random.Random
) -> Chromosome:
    length = rng.randint(min(len_min, num_cols), min(len_max, num_cols))
    return tuple(rng.sample(range(num_cols), length))


def init_population(
    p: EvolutionParams, num_cols: int, rng: random.Random | None = None
) -> list[Chromosome]:
    """Random short chromosomes; lengths uniform in the configured range.

    Duplicates are redrawn a bounded number of times so the first
    generation is as diverse as the column count allows.
    """
    if num_cols < 2:
        raise ValidationError(f"need at least 2 columns, got {num_cols}")
    rng = random.Random(p.seed) if rng is None else rng
    seen: set[Chromosome] = set()
    pop = []
    for _ in range(p.population_size):
        for _ in range(p.retry_budget):
            c = random_chromosome(num_cols, p.init_len_min, p.init_len_max, rng)
            if c not in seen:
                break
        seen.add(c)
        pop.append(c)
    return pop


def mutate(
    c: Chromosome, op: str, num_cols: int, rng: random.Random, min_len: int = 2
) -> Chromosome:
    if op == "insertion":
        col = _absent_column(c, num_cols, rng)
        if col is None:
            return c
        pos = rng.randint(0, len(c))
        return c[:pos] + (col,) + c[pos:]
    if op == "deletion":
        if len(c) <= min_len:
            return c
        pos = rng.randrange(len(c))
        return c[:pos] + c[pos + 1:]
    if op == "substitution":
        col = _absent_column(c, num_cols, rng)
        if col is None:
            return c
        pos = rng.randrange(len(c))
        return c[:pos] + (col,) + c[pos + 1:]
    if op == "swap":
        i, j = sorted(rng.sample(range(len(c)), 2))
        out = list(c)
        out[i], out[j] = out[j], out[i]
        return tuple(out)
    raise ValueError(f"unknown mutation operator {op!r}")


def splice(a: Chromosome, b: Chromosome, cut_a: int, cut_b: int) -> Chromosome:
    """``a[:cut_a] + b[cut_b:]`` with repeated columns dropped (first kept)."""
    return tuple(dict.fromkeys(a[:cut_a] + b[cut_b:]))


def crossover(
    a: Chromosome, b: Chromosome, rng: random.Random, min_len: int = 2, attempts: int = 3
) -> Chromosome:
    """Join a nonempty prefix of ``a`` to a nonempty suffix of ``b``.

    Cut points are redrawn up to ``attempts`` times while the child is
    shorter than ``min_len``; after that ``a`` is returned.
    """
    for _ in range(attempts):
        child = splice(a, b, rng.randint(1, len(a)), rng.randrange(len(b)))
        if len(child) >= min_len:
            return child
    return a


def penalized_score(
    raw_score: float, c: Chromosome, usage: Sequence[int], p: EvolutionParams
) -> float:
    mean_usage = sum(usage[j] for j in c) / len(c)
    return raw_score / p.penalty_base ** mean_usage


def tournament_select(
    pop: Sequence[RankedIndividual],
    usage: Sequence[int],
    p: EvolutionParams,
    rng: random.Random,
    penalized: Sequence[float] | None = None,
) -> Chromosome:
    """Pick the best of ``tournament_size`` uniform draws with replacement.

    A tournament at least as large as ``pop`` is held over the whole
    population instead. ``penalized`` may carry precomputed penalized
    scores aligned with ``pop``; they are recomputed per contestant
    otherwise.
    """
    n = len(pop)
    if p.tournament_size >= n:
        contestants = range(n)
    else:
        contestants = [rng.randrange(n) for _ in range(p.tournament_size)]
    best: list[int] = []
    best_key = None
    for i in contestants:
        score = penalized[i] if penalized is not None else penalized_score(
            pop[i].score, pop[i].chromosome, usage, p
        )
        key = (score, -len(pop[i].chromosome))
        if best_key is None or key > best_key:
            best_key, best = key, [i]
        elif key == best_key and i not in best:
            best.append(i)
    winner = best[0] if len(best) == 1 else rng.choice(best)
    return pop[winner].chromosome


def column_usage(pop: Sequence[Chromosome], num_cols: int) -> list[int]:
    usage = [0] * num_cols
    for c in pop:
        for j in c:
            usage[j] += 1
    return usage


# --------------------------------------------------------------------------
# generation loop
# --------------------------------------------------------------------------

def _score_batch(m, pop, p: EvolutionParams, workers):
    support = evaluate_population(m, pop, p.trend, workers).tolist()
    scores = [fitness(n, len(c), p.trend) for c, n in zip(pop, support)]
    return support, scores


def _offer_all(state: EvolutionState, pop, support, scores, m, p) -> bool:
    changed = False
    for c, s, n in zip(pop, scores, support):
        if state.top_rank.offer(RankedIndividual(c, s, n), m, p):
            changed = True
    return changed


def init_state(m: ExpressionMatrix, p: EvolutionParams, workers: int | None = None) -> EvolutionState:
    rng = random.Random(p.seed)
    pop = init_population(p, m.cols, rng)
    tabu = TabuList()
    for c in pop:
        tabu.add(chromosome_hash(c))
    support, scores = _score_batch(m, pop, p, workers)
    state = EvolutionState(
        generation=0,
        population=pop,
        support=support,
        scores=scores,
        top_rank=TopRankList(p.top_rank_capacity),
        tabu=tabu,
        column_usage=column_usage(pop, m.cols),
        rng=rng,
        evaluations=len(pop),
    )
    _offer_all(state, pop, support, scores, m, p)
    return state


def breed(
    state: EvolutionState,
    ranked: Sequence[RankedIndividual],
    penalized: Sequence[float],
    num_cols: int,
    p: EvolutionParams,
) -> Chromosome:
    """Produce one offspring of ``ranked``, registering it in the tabu list."""
    rng = state.rng
    cum_weights = list(accumulate(p.operator_weights))
    for _ in range(p.retry_budget):
        parent = tournament_select(ranked, state.column_usage, p, rng, penalized)
        op = rng.choices(OPERATORS, cum_weights=cum_weights)[0]
        if op == "crossover":
            other = tournament_select(ranked, state.column_usage, p, rng, penalized)
            child = crossover(parent, other, rng, p.min_cols)
        else:
            child = mutate(parent, op, num_cols, rng, p.min_cols)
        digest = chromosome_hash(child)
        if digest in state.tabu:
            state.tabu.hit()
            continue
        state.tabu.add(digest)
        return child
    child = random_chromosome(num_cols, p.init_len_min, p.init_len_max, rng)
    state.tabu.add(chromosome_hash(child))
    return child


def step_generation(
    state: EvolutionState, m: ExpressionMatrix, p: EvolutionParams, workers: int | None = None
) -> EvolutionState:
    """Advance ``state`` by one generation in place and return it."""
    ranked = state.ranked()
    penalized = [
        penalized_score(ind.score, ind.chromosome, state.column_usage, p) for ind in ranked
    ]
    elites = state.top_rank.entries[: p.elite_count]
    offspring = [
        breed(state, ranked, penalized, m.cols, p)
        for _ in range(p.population_size - len(elites))
    ]

    support, scores = _score_batch(m, offspring, p, workers)
    state.evaluations += len(offspring)
    if _offer_all(state, offspring, support, scores, m, p):
        state.tabu.reset_hits()

    state.population = [e.chromosome for e in elites] + offspring
    state.support = [e.support_count for e in elites] + support
    state.scores = [e.score for e in elites] + scores
    state.column_usage = column_usage(state.population, m.cols)
    state.generation += 1
    return state


def extract_biclusters(
    state: EvolutionState, m: ExpressionMatrix, p: EvolutionParams, workers: int | None = None
) -> BiclusterSet:
    out: BiclusterSet = []
    for entry in state.top_rank.entries:
        if len(out) == p.num_biclusters:
            break
        rows = supporting_rows(m, entry.chromosome, p.trend, workers or 1)
        if len(rows) >= p.trend.min_rows:
            out.append(Bicluster(tuple(rows), entry.chromosome))
    return out


def run(
    m: ExpressionMatrix, p: EvolutionParams, workers: int | None = None
) -> tuple[BiclusterSet, RunReport]:
    """Search ``m`` for trend-preserving biclusters.

    Returns the biclusters of the best ``p.num_biclusters`` top-rank entries
    (possibly fewer, possibly none) and a report of the run.
    """
    t0 = time.perf_counter()
    state = init_state(m, p, workers)
    termination = "budget"
    while state.generation < p.max_iterations:
        step_generation(state, m, p, workers)
        if state.tabu.hit_count >= p.tabu_hits_threshold:
            termination = "converged"
            break
    biclusters = extract_biclusters(state, m, p, workers)
    report = RunReport(
        generations=state.generation,
        wall_time_seconds=time.perf_counter() - t0,
        termination=termination,
        best_score=state.top_rank.best_score(),
        tabu_hits_total=state.tabu.total_hits,
        evaluations=state.evaluations,
    )
    log.info(
        "run finished: %d generations, %s, best score %.1f, %.2fs",
        report.generations, report.termination, report.best_score, report.wall_time_seconds,
    )
    return biclusters, report
