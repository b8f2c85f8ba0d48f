"""Consensus-set formation over an execution matrix.

Solutions "agree" when they pass exactly the same set of generated tests;
each agreement class together with its shared passed-test set is one
consensus set. Two strategies: exhaustive grouping, and randomized
inlier/outlier sampling that converges to the same partition.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import DataError
from .model import ExecutionMatrix


@dataclass
class ConsensusSet:
    solutions: frozenset[int]
    tests: frozenset[int]
    score: float = 0.0

    def __post_init__(self):
        if not self.solutions:
            raise DataError("consensus set must contain at least one solution")


def _sorted_sets(groups: dict[frozenset[int], set[int]]) -> list[ConsensusSet]:
    sets = [
        ConsensusSet(solutions=frozenset(sols), tests=tests)
        for tests, sols in groups.items()
    ]
    sets.sort(key=lambda cs: (-len(cs.solutions), min(cs.solutions)))
    return sets


def group_exhaustive(matrix: ExecutionMatrix) -> list[ConsensusSet]:
    """Partition all solutions by their exact passed-test set.

    Output order: descending |solutions|, then ascending smallest solution id.
    Solutions passing nothing form a set with tests=frozenset().
    """
    groups: dict[frozenset[int], set[int]] = {}
    for s in range(matrix.n_solutions):
        groups.setdefault(matrix.pass_set(s), set()).add(s)
    return _sorted_sets(groups)


def group_ransac(matrix: ExecutionMatrix, iterations: int, seed: int) -> list[ConsensusSet]:
    """Randomized consensus formation by inlier sampling.

    Each iteration samples one (solution, test) cell. A passing cell is an
    inlier; its solution's agreement class (all solutions with the identical
    pass vector, plus the shared tests) becomes a consensus set. Failing
    cells are outliers and contribute nothing. Distinct sets accumulate
    across iterations.

    Solutions with an empty pass vector can never be sampled as inliers, so
    their class is appended at the end; this keeps the converged output equal
    to group_exhaustive and the result a partition.
    """
    if iterations < 1:
        raise DataError(f"iterations must be >= 1, got {iterations}")
    n, m = matrix.n_solutions, matrix.n_tests
    if n == 0 or m == 0:
        return group_exhaustive(matrix)

    pass_sets = [matrix.pass_set(s) for s in range(n)]
    by_vector: dict[frozenset[int], set[int]] = {}
    for s, ps in enumerate(pass_sets):
        by_vector.setdefault(ps, set()).add(s)

    rng = random.Random(seed)
    found: dict[frozenset[int], set[int]] = {}
    for _ in range(iterations):
        s = rng.randrange(n)
        t = rng.randrange(m)
        if t in pass_sets[s]:  # inlier
            found[pass_sets[s]] = by_vector[pass_sets[s]]

    empty = frozenset()
    if empty in by_vector:
        found[empty] = by_vector[empty]
    return _sorted_sets(found)


def all_error_test_ids(matrix: ExecutionMatrix) -> set[int]:
    """Tests whose outcome is Error for every solution (droppable via CLI flag)."""
    from .model import Status

    out = set()
    for t in range(matrix.n_tests):
        if matrix.n_solutions and all(
            matrix[(s, t)].status is Status.ERROR for s in range(matrix.n_solutions)
        ):
            out.add(t)
    return out


def consensus_records(task_id: str, sets: list[ConsensusSet]) -> list[dict]:
    """Line-record form: {task_id, set_index, solution_ids, test_ids, score}."""
    return [
        {
            "task_id": task_id,
            "set_index": i,
            "solution_ids": sorted(cs.solutions),
            "test_ids": sorted(cs.tests),
            "score": cs.score,
        }
        for i, cs in enumerate(sets)
    ]
