import sys
from pathlib import Path

import pytest

from testrank.model import (CandidateSolution, ExecutionMatrix, Outcome,
                            Problem, Status, TestCase)

HELPERS = Path(__file__).parent / "helpers"
NAIVE_RUNNER = f"{sys.executable} {HELPERS / 'naive_runner.py'}"

FIG2_TASK = "square/0"
FIG2_SOURCES = [
    "def num_square(a):\n    return a ** 2\n",
    "def num_square(a):\n    return a * a\n",
    "def num_square(a):\n    return a\n",
]
FIG2_ASSERTIONS = [
    "assert num_square(1) == 1",
    "assert num_square(2) == 4",
    "assert num_square(0) == 0",
]
FIG2_HIDDEN = [
    "assert num_square(3) == 9",
    "assert num_square(4) == 16",
]
# hand-executed: s0 and s1 pass everything, the identity passes only the
# two assertions whose input is its own square (1 and 0)
FIG2_PASS_SETS = [{0, 1, 2}, {0, 1, 2}, {0, 2}]


@pytest.fixture
def fig2_problem():
    return Problem(task_id=FIG2_TASK, prompt="return the square of a number",
                   entry_point="num_square", hidden_tests=tuple(FIG2_HIDDEN))


@pytest.fixture
def fig2_solutions():
    return [CandidateSolution(FIG2_TASK, i, src) for i, src in enumerate(FIG2_SOURCES)]


@pytest.fixture
def fig2_tests():
    return [TestCase(FIG2_TASK, i, a) for i, a in enumerate(FIG2_ASSERTIONS)]


def matrix_from_pass_sets(task_id, pass_sets, n_tests):
    cells = {
        (s, t): Outcome(Status.PASS if t in passed else Status.FAIL)
        for s, passed in enumerate(pass_sets)
        for t in range(n_tests)
    }
    return ExecutionMatrix(task_id, len(pass_sets), n_tests, cells)


@pytest.fixture
def fig2_matrix():
    return matrix_from_pass_sets(FIG2_TASK, FIG2_PASS_SETS, 3)


def write_fig2_corpus(tmp_path, with_hidden=True):
    """Write the golden corpus files; returns (problems, solutions, tests) paths."""
    import json

    problems = tmp_path / "problems.jsonl"
    rec = {"task_id": FIG2_TASK, "prompt": "return the square of a number",
           "entry_point": "num_square"}
    if with_hidden:
        rec["hidden_tests"] = FIG2_HIDDEN
    problems.write_text(json.dumps(rec) + "\n", encoding="utf-8")

    solutions = tmp_path / "solutions.jsonl"
    solutions.write_text("".join(
        json.dumps({"task_id": FIG2_TASK, "solution_id": i, "completion": src}) + "\n"
        for i, src in enumerate(FIG2_SOURCES)), encoding="utf-8")

    tests = tmp_path / "tests.jsonl"
    tests.write_text("".join(
        json.dumps({"task_id": FIG2_TASK, "test_id": i, "assertion": a}) + "\n"
        for i, a in enumerate(FIG2_ASSERTIONS)), encoding="utf-8")
    return problems, solutions, tests
