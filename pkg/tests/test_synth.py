import pytest

from testrank.consensus import group_exhaustive
from testrank.errors import DataError
from testrank.evorank import GaConfig, rank
from testrank.metrics import Method, build_report
from testrank.model import ScoreParams, Status
from testrank.synth import SynthSpec, SynthTruth, generate


def test_planted_full_pass_group_recovered():
    spec = SynthSpec(tasks=1, solutions_per_task=10, tests_per_task=10,
                     correct_solution_rate=0.4, valid_test_rate=1.0, seed=7)
    matrices, truth = generate(spec)
    (task_id, matrix), = matrices.items()
    sets = group_exhaustive(matrix)
    top = sets[0]
    assert top.solutions == truth.correct_solution_ids[task_id]
    assert len(top.solutions) == 4
    assert top.tests == frozenset(range(10))


def test_truth_consistent_with_matrix():
    spec = SynthSpec(tasks=3, solutions_per_task=8, tests_per_task=6,
                     correct_solution_rate=0.5, valid_test_rate=0.5,
                     wrong_cluster_sizes=(2,), seed=11)
    matrices, truth = generate(spec)
    for task_id, matrix in matrices.items():
        valid = truth.valid_test_ids[task_id]
        for s in truth.correct_solution_ids[task_id]:
            assert matrix.pass_set(s) == valid


def test_zero_correct_rate_means_ranked_never_wins():
    spec = SynthSpec(tasks=2, solutions_per_task=10, tests_per_task=10,
                     correct_solution_rate=0.0, valid_test_rate=0.8, seed=3)
    matrices, truth = generate(spec)
    selections = {
        t: rank(t, group_exhaustive(matrices[t]), ScoreParams(), GaConfig(seed=0))
        for t in matrices
    }
    correctness = {t: truth.correctness(t) for t in matrices}
    report = build_report({t: 10 for t in matrices}, selections, correctness,
                          [1, 2, 10], Method.RANKED)
    assert all(v == 0.0 for v in report.aggregate.values())


def test_wrong_cluster_failure_mode():
    # a large agreeing-but-wrong cluster passing more tests than the correct
    # group wins the ranking: the method's documented failure mode
    spec = SynthSpec(tasks=1, solutions_per_task=12, tests_per_task=20,
                     correct_solution_rate=0.25, valid_test_rate=0.1,
                     wrong_cluster_sizes=(6,), seed=2)
    matrices, truth = generate(spec)
    (task_id, matrix), = matrices.items()
    sel = rank(task_id, group_exhaustive(matrix), ScoreParams(), GaConfig(seed=0))
    assert sel.best not in truth.correct_solution_ids[task_id]


def test_deterministic_per_seed():
    spec = SynthSpec(tasks=2, solutions_per_task=6, tests_per_task=6,
                     correct_solution_rate=0.5, valid_test_rate=0.5, seed=9)
    m1, t1 = generate(spec)
    m2, t2 = generate(spec)
    assert m1 == m2
    assert t1.correct_solution_ids == t2.correct_solution_ids
    m3, _ = generate(SynthSpec(tasks=2, solutions_per_task=6, tests_per_task=6,
                               correct_solution_rate=0.5, valid_test_rate=0.5, seed=10))
    assert m3 != m1  # counts identical, random choices differ
    assert all(m.n_solutions == 6 and m.n_tests == 6 for m in m3.values())


def test_matrices_contain_only_pass_fail():
    spec = SynthSpec(tasks=1, solutions_per_task=5, tests_per_task=5,
                     correct_solution_rate=0.4, valid_test_rate=0.6, seed=1)
    matrices, _ = generate(spec)
    for m in matrices.values():
        assert all(o.status in (Status.PASS, Status.FAIL) for o in m.cells.values())


def test_infeasible_cluster_spec():
    with pytest.raises(DataError, match="clusters"):
        generate(SynthSpec(tasks=1, solutions_per_task=10, tests_per_task=10,
                           correct_solution_rate=0.8, valid_test_rate=1.0,
                           wrong_cluster_sizes=(5,), seed=0))


def test_spec_validation():
    with pytest.raises(DataError):
        SynthSpec(tasks=0, solutions_per_task=1, tests_per_task=1,
                  correct_solution_rate=0.5, valid_test_rate=0.5)
    with pytest.raises(DataError):
        SynthSpec(tasks=1, solutions_per_task=1, tests_per_task=1,
                  correct_solution_rate=1.5, valid_test_rate=0.5)


def test_truth_records_round_trip(tmp_path):
    from testrank.model import write_jsonl
    from testrank.synth import load_truth

    spec = SynthSpec(tasks=2, solutions_per_task=5, tests_per_task=5,
                     correct_solution_rate=0.4, valid_test_rate=0.8, seed=4)
    _, truth = generate(spec)
    path = tmp_path / "truth.jsonl"
    write_jsonl(path, truth.records())
    loaded = load_truth(path)
    assert loaded.correct_solution_ids == truth.correct_solution_ids
    assert loaded.valid_test_ids == truth.valid_test_ids
