import json

import pytest

from testrank.errors import RunnerError
from testrank.harness import HarnessConfig, execute_matrix, warm_cache
from testrank.model import CandidateSolution, Problem, Status, TestCase

from conftest import FIG2_PASS_SETS, FIG2_TASK, NAIVE_RUNNER


def harness_cfg(tmp_path, timeout_ms=3000, workers=2, cache=True):
    return HarnessConfig(
        runner_cmd=NAIVE_RUNNER,
        workers=workers,
        timeout_ms=timeout_ms,
        cache_path=(tmp_path / "cache.jsonl") if cache else None,
    )


def statuses(matrix):
    return {cell: o.status for cell, o in matrix.cells.items()}


def test_fig2_execution(tmp_path, fig2_problem, fig2_solutions, fig2_tests):
    matrix = execute_matrix(fig2_problem, fig2_solutions, fig2_tests,
                            harness_cfg(tmp_path, cache=False))
    assert len(matrix.cells) == 9
    counts = {}
    for o in matrix.cells.values():
        counts[o.status] = counts.get(o.status, 0) + 1
    # hand-executed: the identity solution passes num_square(1)==1 and
    # num_square(0)==0 and fails only num_square(2)==4
    assert counts == {Status.PASS: 8, Status.FAIL: 1}
    for s, passed in enumerate(FIG2_PASS_SETS):
        assert matrix.pass_set(s) == frozenset(passed)


def test_zero_tests_spawns_no_runner(tmp_path, fig2_problem, fig2_solutions):
    cfg = HarnessConfig(runner_cmd="/nonexistent/runner", workers=2, timeout_ms=100)
    matrix = execute_matrix(fig2_problem, fig2_solutions, [], cfg)
    assert matrix.n_tests == 0 and matrix.cells == {}


def test_infinite_loop_row_times_out(tmp_path, fig2_problem, fig2_tests):
    hostile = CandidateSolution(FIG2_TASK, 0, "while True: pass\n")
    matrix = execute_matrix(fig2_problem, [hostile], fig2_tests,
                            harness_cfg(tmp_path, timeout_ms=100, cache=False))
    assert all(o.status is Status.TIMEOUT for o in matrix.cells.values())


def test_hostile_solution_isolated(tmp_path, fig2_problem, fig2_solutions, fig2_tests):
    hostile = CandidateSolution(FIG2_TASK, 3, "while True: pass\n")
    crasher = CandidateSolution(FIG2_TASK, 4, "import os\nos._exit(7)\n")
    matrix = execute_matrix(fig2_problem, fig2_solutions + [hostile, crasher],
                            fig2_tests, harness_cfg(tmp_path, timeout_ms=100, cache=False))
    for s, passed in enumerate(FIG2_PASS_SETS):
        assert matrix.pass_set(s) == frozenset(passed)
    assert all(matrix[(3, t)].status is Status.TIMEOUT for t in range(3))
    assert all(matrix[(4, t)].status is Status.ERROR for t in range(3))


def test_cache_second_run_executes_nothing(tmp_path, fig2_problem, fig2_solutions, fig2_tests):
    cfg = harness_cfg(tmp_path)
    stats1, stats2 = {}, {}
    m1 = execute_matrix(fig2_problem, fig2_solutions, fig2_tests, cfg, stats=stats1)
    m2 = execute_matrix(fig2_problem, fig2_solutions, fig2_tests, cfg, stats=stats2)
    assert stats1["executed"] == 9 and stats1["cached"] == 0
    assert stats2["executed"] == 0 and stats2["cached"] == 9
    assert m1 == m2


def test_cache_mutated_source_reruns_only_that_row(tmp_path, fig2_problem,
                                                   fig2_solutions, fig2_tests):
    cfg = harness_cfg(tmp_path)
    execute_matrix(fig2_problem, fig2_solutions, fig2_tests, cfg)
    mutated = list(fig2_solutions)
    mutated[2] = CandidateSolution(FIG2_TASK, 2, "def num_square(a):\n    return a + a\n")
    stats = {}
    matrix = execute_matrix(fig2_problem, mutated, fig2_tests, cfg, stats=stats)
    assert stats["executed"] == 3 and stats["cached"] == 6
    assert matrix.pass_set(2) == frozenset({1, 2})  # 2+2==4 and 0+0==0


def test_cache_timeout_cells_rerun_on_new_budget(tmp_path, fig2_problem, fig2_tests):
    hostile = CandidateSolution(FIG2_TASK, 0, "while True: pass\n")
    fine = CandidateSolution(FIG2_TASK, 1, "def num_square(a):\n    return a * a\n")
    cfg_fast = harness_cfg(tmp_path, timeout_ms=100)
    execute_matrix(fig2_problem, [hostile, fine], fig2_tests, cfg_fast)

    cfg_slow = harness_cfg(tmp_path, timeout_ms=200)
    stats = {}
    execute_matrix(fig2_problem, [hostile, fine], fig2_tests, cfg_slow, stats=stats)
    # pass/fail cells are budget-invariant; timeout cells are re-executed
    assert stats["cached"] == 3 and stats["executed"] == 3


def test_corrupt_cache_line_skipped(tmp_path, fig2_problem, fig2_solutions, fig2_tests):
    cfg = harness_cfg(tmp_path)
    execute_matrix(fig2_problem, fig2_solutions, fig2_tests, cfg)
    cache_file = tmp_path / "cache.jsonl"
    lines = cache_file.read_text().splitlines()
    lines.insert(1, "corrupt {{{")
    cache_file.write_text("\n".join(lines) + "\n")
    stats = {}
    execute_matrix(fig2_problem, fig2_solutions, fig2_tests, cfg, stats=stats)
    assert stats["executed"] == 0


def test_runner_crash_retried_once(tmp_path, fig2_problem):
    marker = tmp_path / "crashed-once"
    sol = CandidateSolution(FIG2_TASK, 0, "def num_square(a):\n    return a\n")
    test = TestCase(FIG2_TASK, 0, f"__crash_once__:{marker}")
    matrix = execute_matrix(fig2_problem, [sol], [test],
                            harness_cfg(tmp_path, cache=False, workers=1))
    assert matrix[(0, 0)].status is Status.PASS
    assert marker.exists()


def test_runner_crash_twice_marks_error(tmp_path, fig2_problem):
    sol = CandidateSolution(FIG2_TASK, 0, "x = 1\n")
    test = TestCase(FIG2_TASK, 0, "__crash__")
    matrix = execute_matrix(fig2_problem, [sol], [test],
                            harness_cfg(tmp_path, cache=False, workers=1))
    assert matrix[(0, 0)].status is Status.ERROR


def test_protocol_violations_mark_cell_error(tmp_path, fig2_problem):
    sol = CandidateSolution(FIG2_TASK, 0, "def num_square(a):\n    return a * a\n")
    tests = [
        TestCase(FIG2_TASK, 0, "__garbage__"),
        TestCase(FIG2_TASK, 1, "__wrong_id__"),
        TestCase(FIG2_TASK, 2, "assert num_square(2) == 4"),
    ]
    matrix = execute_matrix(fig2_problem, [sol], tests,
                            harness_cfg(tmp_path, cache=False, workers=1))
    assert matrix[(0, 0)].status is Status.ERROR
    assert matrix[(0, 1)].status is Status.ERROR
    assert matrix[(0, 2)].status is Status.PASS


def test_order_independence(tmp_path, fig2_problem, fig2_solutions, fig2_tests):
    cfg = harness_cfg(tmp_path, cache=False, workers=3)
    forward = execute_matrix(fig2_problem, fig2_solutions, fig2_tests, cfg)
    reordered = [fig2_solutions[2], fig2_solutions[0], fig2_solutions[1]]
    renumbered = [CandidateSolution(FIG2_TASK, i, s.source)
                  for i, s in enumerate(reordered)]
    backward = execute_matrix(fig2_problem, renumbered, fig2_tests, cfg)
    perm = {0: 2, 1: 0, 2: 1}  # new id -> old id
    for (s, t), o in backward.cells.items():
        assert o.status == forward[(perm[s], t)].status


def test_unspawnable_runner_raises(tmp_path, fig2_problem, fig2_solutions, fig2_tests):
    cfg = HarnessConfig(runner_cmd="/nonexistent/runner", workers=1, timeout_ms=100)
    with pytest.raises(RunnerError):
        execute_matrix(fig2_problem, fig2_solutions, fig2_tests, cfg)


def test_solutions_must_belong_to_task(tmp_path, fig2_problem, fig2_tests):
    from testrank.errors import DataError

    alien = CandidateSolution("other/1", 0, "pass")
    with pytest.raises(DataError):
        execute_matrix(fig2_problem, [alien], fig2_tests, harness_cfg(tmp_path))


def test_deterministic_matrices(tmp_path, fig2_problem, fig2_solutions, fig2_tests):
    cfg = harness_cfg(tmp_path, cache=False, workers=4)
    m1 = execute_matrix(fig2_problem, fig2_solutions, fig2_tests, cfg)
    m2 = execute_matrix(fig2_problem, fig2_solutions, fig2_tests, cfg)
    assert statuses(m1) == statuses(m2)


def test_warm_cache_creates_parent_dirs(tmp_path):
    cache = warm_cache(tmp_path / "deep" / "cache.jsonl")
    assert cache.lookup("t", "a", "b", 100) is None
