"""Synthetic corpora with planted ground truth.

Emits execution matrices directly (no runner involved): correct solutions
pass exactly the valid tests; invalid tests model generated assertions with
wrong expected values, which correct solutions fail. Optional wrong clusters
plant groups of incorrect solutions that agree on one shared wrong pass
vector, the method's known failure mode when such a cluster out-scores the
correct group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .metrics import CorrectnessVector
from .model import ExecutionMatrix, Outcome, Status

# pass probabilities for non-planted structure
_CLUSTER_PASS_P = 0.5
_STRAY_PASS_P = 0.25


@dataclass(frozen=True)
class SynthSpec:
    tasks: int
    solutions_per_task: int
    tests_per_task: int
    correct_solution_rate: float
    valid_test_rate: float
    wrong_cluster_sizes: tuple[int, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.tasks < 1 or self.solutions_per_task < 1 or self.tests_per_task < 1:
            raise DataError("tasks, solutions_per_task and tests_per_task must be >= 1")
        for name, v in (("correct_solution_rate", self.correct_solution_rate),
                        ("valid_test_rate", self.valid_test_rate)):
            if not 0.0 <= v <= 1.0:
                raise DataError(f"{name} must be in [0, 1], got {v}")
        if any(s < 1 for s in self.wrong_cluster_sizes):
            raise DataError("wrong cluster sizes must be >= 1")


@dataclass
class SynthTruth:
    correct_solution_ids: dict[str, frozenset[int]] = field(default_factory=dict)
    valid_test_ids: dict[str, frozenset[int]] = field(default_factory=dict)

    def correctness(self, task_id: str) -> CorrectnessVector:
        return CorrectnessVector(task_id, self.correct_solution_ids[task_id])

    def records(self) -> list[dict]:
        return [
            {
                "task_id": t,
                "correct_solution_ids": sorted(self.correct_solution_ids[t]),
                "valid_test_ids": sorted(self.valid_test_ids[t]),
            }
            for t in sorted(self.correct_solution_ids)
        ]


def _draw_vector(rng: np.random.Generator, m: int, p: float,
                 forbidden: set[frozenset[int]]) -> frozenset[int]:
    for _ in range(1000):
        vec = frozenset(int(t) for t in np.nonzero(rng.random(m) < p)[0])
        if vec not in forbidden:
            return vec
    raise DataError("could not draw a distinct pass vector; spec too tight")


def generate(spec: SynthSpec) -> tuple[dict[str, ExecutionMatrix], SynthTruth]:
    """Build one matrix per task plus the planted truth labels.

    Deterministic per seed: each task uses a Generator seeded with
    (spec.seed, task index).
    """
    n, m = spec.solutions_per_task, spec.tests_per_task
    n_correct = round(spec.correct_solution_rate * n)
    n_valid = round(spec.valid_test_rate * m)
    n_wrong = n - n_correct
    if sum(spec.wrong_cluster_sizes) > n_wrong:
        raise DataError(
            f"wrong clusters need {sum(spec.wrong_cluster_sizes)} solutions "
            f"but only {n_wrong} are incorrect")

    matrices: dict[str, ExecutionMatrix] = {}
    truth = SynthTruth()
    for ti in range(spec.tasks):
        task_id = f"synth/{ti}"
        rng = np.random.default_rng([spec.seed, ti])

        correct_ids = frozenset(int(s) for s in rng.choice(n, size=n_correct, replace=False))
        valid_ids = frozenset(int(t) for t in rng.choice(m, size=n_valid, replace=False))
        wrong_ids = [s for s in range(n) if s not in correct_ids]

        pass_vecs: dict[int, frozenset[int]] = {s: valid_ids for s in correct_ids}
        used = {valid_ids} if n_correct else set()

        cursor = 0
        for size in spec.wrong_cluster_sizes:
            vec = _draw_vector(rng, m, _CLUSTER_PASS_P, used)
            used.add(vec)
            for s in wrong_ids[cursor:cursor + size]:
                pass_vecs[s] = vec
            cursor += size
        for s in wrong_ids[cursor:]:
            # strays only need to avoid the planted vectors, not each other
            pass_vecs[s] = _draw_vector(rng, m, _STRAY_PASS_P, used)

        cells = {
            (s, t): Outcome(Status.PASS if t in pass_vecs[s] else Status.FAIL)
            for s in range(n) for t in range(m)
        }
        matrices[task_id] = ExecutionMatrix(task_id, n, m, cells)
        truth.correct_solution_ids[task_id] = correct_ids
        truth.valid_test_ids[task_id] = valid_ids
    return matrices, truth


def load_truth(path) -> SynthTruth:
    from .model import _read_jsonl

    truth = SynthTruth()
    for _, obj in _read_jsonl(path):
        t = str(obj["task_id"])
        truth.correct_solution_ids[t] = frozenset(int(s) for s in obj["correct_solution_ids"])
        truth.valid_test_ids[t] = frozenset(int(x) for x in obj.get("valid_test_ids", []))
    return truth
