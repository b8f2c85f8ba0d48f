"""Scoring of consensus sets and GA ranking of solutions.

A consensus set scores |S|^alpha * |T|^beta; every member solution inherits
the set score. The GA searches permutations of solution ids with tournament
selection, order crossover (OX1), swap mutation and elitism, under a
gamma-discounted fitness whose global optima are exactly the
score-descending orders. The returned order is canonicalized (stable sort by
descending score, then ascending id) so equal-score ties are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .consensus import ConsensusSet
from .errors import DataError
from .model import ScoreParams


@dataclass(frozen=True)
class GaConfig:
    population: int = 50
    generations: int = 100
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    elitism: int = 2
    gamma: float = 0.9  # rank-discount base
    patience: int = 20  # early stop after this many unimproved generations
    seed: int = 0

    def __post_init__(self):
        if self.population < 1 or self.generations < 1 or self.patience < 1:
            raise DataError("population, generations and patience must be >= 1")
        if not 0 <= self.elitism < self.population:
            raise DataError("elitism must satisfy 0 <= elitism < population")
        if not 1 <= self.tournament_size <= self.population:
            raise DataError("tournament_size must be in [1, population]")
        if not (0.0 <= self.crossover_rate <= 1.0 and 0.0 <= self.mutation_rate <= 1.0):
            raise DataError("crossover_rate and mutation_rate must be in [0, 1]")
        if not 0.0 < self.gamma < 1.0:
            raise DataError("gamma must be in (0, 1)")


@dataclass
class RankedSelection:
    task_id: str
    order: list[int]  # best first
    solution_scores: dict[int, float]
    best: int | None
    generations_run: int = 0
    best_fitness_trace: list[float] = field(default_factory=list)
    # best genome found by the GA before canonicalization; kept for diagnostics
    raw_order: list[int] = field(default_factory=list)


def score_set(cset: ConsensusSet, params: ScoreParams) -> float:
    """|S|^alpha * |T|^beta with the 0^0 = 1 convention."""
    value = float(len(cset.solutions)) ** params.alpha * float(len(cset.tests)) ** params.beta
    if not math.isfinite(value):
        raise DataError(
            f"non-finite score for |S|={len(cset.solutions)}, |T|={len(cset.tests)}")
    return value


def solution_scores(sets: list[ConsensusSet], params: ScoreParams) -> dict[int, float]:
    """Score each set and spread the score onto its member solutions.

    Raises DataError unless the sets partition a dense id range 0..n-1.
    """
    scores: dict[int, float] = {}
    for cset in sets:
        value = score_set(cset, params)
        for sid in cset.solutions:
            if sid in scores:
                raise DataError(f"solution {sid} appears in more than one consensus set")
            scores[sid] = value
    n = len(scores)
    if scores and set(scores) != set(range(n)):
        raise DataError("consensus sets do not cover a dense 0..n-1 id range")
    return scores


def fitness(order: list[int], scores: dict[int, float], gamma: float) -> float:
    """Gamma-discounted sum of scores along the order; maximal iff score-descending."""
    if sorted(order) != list(range(len(order))):
        raise DataError("genome is not a permutation of 0..n-1")
    acc = 0.0
    disc = 1.0
    for sid in order:
        acc += disc * scores[sid]
        disc *= gamma
    return acc


def _canonical_order(scores: dict[int, float]) -> list[int]:
    return sorted(scores, key=lambda sid: (-scores[sid], sid))


def rank(task_id: str, sets: list[ConsensusSet], params: ScoreParams,
         cfg: GaConfig) -> RankedSelection:
    """Run the seeded GA and return the canonicalized ranking.

    Deterministic for a fixed (sets, params, cfg): all randomness comes from
    one numpy Generator seeded with cfg.seed.
    """
    by_sid = solution_scores(sets, params)
    n = len(by_sid)
    if n == 0:
        return RankedSelection(task_id, [], {}, None)

    scores = np.array([by_sid[i] for i in range(n)], dtype=np.float64)
    trace: list[float] = []
    generations_run = 0
    raw_best = list(range(n))

    if n > 1:
        rng = np.random.default_rng(cfg.seed)
        pop = np.stack(
            [rng.permutation(n) for _ in range(cfg.population)]
        ).astype(np.int64)
        best_fit = -math.inf
        stall = 0
        for gen in range(cfg.generations):
            fit = kernels.fitness_batch(pop, scores, cfg.gamma)
            gen_best = int(np.argmax(fit))
            if float(fit[gen_best]) > best_fit:
                best_fit = float(fit[gen_best])
                raw_best = [int(x) for x in pop[gen_best]]
                stall = 0
            else:
                stall += 1
            trace.append(best_fit)
            generations_run = gen + 1
            if stall >= cfg.patience or gen == cfg.generations - 1:
                break

            survivors = np.argsort(-fit, kind="stable")
            elite = pop[survivors[:cfg.elitism]]
            n_child = cfg.population - cfg.elitism

            cand = rng.integers(0, cfg.population, size=(2, n_child, cfg.tournament_size))
            cand_fit = fit[cand]
            win = np.take_along_axis(
                cand, np.argmax(cand_fit, axis=2)[..., None], axis=2)[..., 0]
            p1 = pop[win[0]]
            p2 = pop[win[1]]

            cross = rng.random(n_child) < cfg.crossover_rate
            cuts = rng.integers(0, n, size=(2, n_child))
            lo = np.minimum(cuts[0], cuts[1]).astype(np.int64)
            hi = np.maximum(cuts[0], cuts[1]).astype(np.int64)
            children = p1.copy()
            if cross.any():
                children[cross] = kernels.ox1_batch(
                    p1[cross], p2[cross], lo[cross], hi[cross])

            mutate = rng.random(n_child) < cfg.mutation_rate
            pos = rng.integers(0, n, size=(n_child, 2))
            rows = np.nonzero(mutate)[0]
            if rows.size:
                a, b = pos[rows, 0], pos[rows, 1]
                tmp = children[rows, a].copy()
                children[rows, a] = children[rows, b]
                children[rows, b] = tmp

            pop = np.concatenate([elite, children]) if cfg.elitism else children

    order = _canonical_order(by_sid)
    return RankedSelection(
        task_id=task_id,
        order=order,
        solution_scores=by_sid,
        best=order[0],
        generations_run=generations_run,
        best_fitness_trace=trace,
        raw_order=raw_best,
    )


def select_top_k(sel: RankedSelection, k: int) -> list[int]:
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    return sel.order[:k]


def selection_record(sel: RankedSelection) -> dict:
    """Line-record form used by the selections file and the rank dump."""
    return {
        "task_id": sel.task_id,
        "order": sel.order,
        "solution_scores": {str(sid): sel.solution_scores[sid] for sid in sorted(sel.solution_scores)},
        "best": sel.best,
        "generations_run": sel.generations_run,
        "best_fitness_trace": sel.best_fitness_trace,
    }
