"""Command-line entry points: run | group | rank | eval | tune | synth.

All file formats are line-delimited JSON, UTF-8, one object per line:

  problems:   {"task_id", "prompt", "entry_point", "hidden_tests"?: [...]}
  solutions:  {"task_id", "solution_id"?, "completion"}
  tests:      {"task_id", "test_id"?, "assertion"}
  matrix:     {"task_id", "solution_id", "test_id", "status", "duration_ms",
               "source_hash", "assertion_hash"}
  selections: {"task_id", "order", "solution_scores", "best", ...}
  truth:      {"task_id", "correct_solution_ids", "valid_test_ids"}

A JSON config file (--config) may supply any long-option value by its
option name with dashes replaced by underscores; explicit flags win.
The TESTRANK_RUNNER environment variable overrides the runner command.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runner failure.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import consensus as consensus_mod
from . import evorank, metrics, synth
from .errors import DataError, RunnerError
from .harness import HarnessConfig, execute_matrix, warm_cache
from .model import (Corpus, ExecutionMatrix, Problem, ScoreParams, TestCase,
                    load_corpus, load_matrices, write_jsonl)

RUNNER_ENV = "TESTRANK_RUNNER"


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise DataError(f"config file not found: {p}")
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{p}: malformed config: {exc}") from exc
    if not isinstance(obj, dict):
        raise DataError(f"{p}: config must be a JSON object")
    return obj


def _pick(flag, config: dict, key: str, default):
    """Effective option value: explicit flag > config file > default."""
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


def _require_path(value, name: str) -> Path:
    if value is None:
        raise click.UsageError(f"missing required option --{name}")
    p = Path(value)
    if not p.exists():
        raise DataError(f"{name} file not found: {p}")
    return p


def _parse_int_list(text: str, name: str) -> list[int]:
    try:
        return [int(x) for x in str(text).replace(",", " ").split()]
    except ValueError as exc:
        raise click.UsageError(f"bad {name}: {text!r}") from exc


def _parse_float_list(text: str, name: str) -> list[float]:
    try:
        return [float(x) for x in str(text).replace(",", " ").split()]
    except ValueError as exc:
        raise click.UsageError(f"bad {name}: {text!r}") from exc


def _runner_cmd(flag, config: dict) -> str:
    cmd = os.environ.get(RUNNER_ENV) or _pick(flag, config, "runner_cmd", None)
    if not cmd:
        raise click.UsageError(
            f"no runner command: pass --runner-cmd or set {RUNNER_ENV}")
    return cmd


def _ga_config(config: dict, seed, population, generations) -> evorank.GaConfig:
    return evorank.GaConfig(
        population=int(_pick(population, config, "population", 50)),
        generations=int(_pick(generations, config, "generations", 100)),
        tournament_size=int(config.get("tournament_size", 3)),
        crossover_rate=float(config.get("crossover_rate", 0.9)),
        mutation_rate=float(config.get("mutation_rate", 0.1)),
        elitism=int(config.get("elitism", 2)),
        gamma=float(config.get("gamma", 0.9)),
        patience=int(config.get("patience", 20)),
        seed=int(_pick(seed, config, "seed", 0)),
    )


def _group_matrices(matrices: dict[str, ExecutionMatrix], strategy: str,
                    iterations: int | None, seed: int,
                    drop_all_error: bool) -> dict[str, list]:
    sets_by_task = {}
    for task_id in sorted(matrices):
        matrix = matrices[task_id]
        if drop_all_error:
            dead = consensus_mod.all_error_test_ids(matrix)
            if dead:
                matrix = matrix.drop_tests(dead)
        if strategy == "ransac":
            iters = iterations or 10 * max(1, matrix.n_solutions) * max(1, matrix.n_tests)
            sets_by_task[task_id] = consensus_mod.group_ransac(matrix, iters, seed)
        else:
            sets_by_task[task_id] = consensus_mod.group_exhaustive(matrix)
    return sets_by_task


def _rank_all(sets_by_task: dict, params: ScoreParams,
              cfg: evorank.GaConfig) -> dict[str, evorank.RankedSelection]:
    selections = {}
    for task_id in sorted(sets_by_task):
        sets = sets_by_task[task_id]
        for cset in sets:
            cset.score = evorank.score_set(cset, params)
        selections[task_id] = evorank.rank(task_id, sets, params, cfg)
    return selections


def _write_consensus(path: Path, sets_by_task: dict) -> None:
    write_jsonl(path, (
        rec
        for task_id in sorted(sets_by_task)
        for rec in consensus_mod.consensus_records(task_id, sets_by_task[task_id])
    ))


def _write_selections(path: Path, selections: dict) -> None:
    write_jsonl(path, (
        evorank.selection_record(selections[t]) for t in sorted(selections)
    ))


def _load_selections(path: Path) -> dict[str, evorank.RankedSelection]:
    from .model import _read_jsonl

    out = {}
    for _, obj in _read_jsonl(path):
        task_id = str(obj["task_id"])
        scores = {int(k): float(v) for k, v in obj.get("solution_scores", {}).items()}
        out[task_id] = evorank.RankedSelection(
            task_id=task_id,
            order=[int(x) for x in obj["order"]],
            solution_scores=scores,
            best=obj.get("best"),
            generations_run=int(obj.get("generations_run", 0)),
            best_fitness_trace=list(obj.get("best_fitness_trace", [])),
        )
    return out


def _hidden_correctness(corpus: Corpus, harness_cfg: HarnessConfig,
                        cache_path: Path | None) -> dict[str, metrics.CorrectnessVector]:
    """Judge every solution against its task's hidden tests via the harness."""
    cache = warm_cache(cache_path) if cache_path else None
    out = {}
    for task_id in corpus.task_ids:
        hidden = corpus.hidden_tests(task_id)
        if not hidden:
            raise DataError(f"task {task_id} has no hidden tests; supply --truth instead")
        problem = corpus.problem(task_id)
        tests = [TestCase(task_id, i, a) for i, a in enumerate(hidden)]
        matrix = execute_matrix(problem, corpus.solutions(task_id), tests,
                                harness_cfg, cache=cache)
        out[task_id] = metrics.correctness_from_matrix(task_id, matrix)
    return out


def _reports(matrices: dict, selections: dict, correctness: dict,
             k_values: list[int], methods: list[metrics.Method]):
    n_samples = {t: matrices[t].n_solutions for t in matrices}
    return [
        metrics.build_report(n_samples, selections, correctness, k_values, m)
        for m in methods
    ]


def _write_reports(out_dir: Path, reports) -> None:
    payload = {r.method.value: r.to_record() for r in reports}
    (out_dir / "report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out_dir / "report.txt").write_text(metrics.render_table(reports), encoding="utf-8")


@click.group()
def cli():
    """Execution-agreement reranking of generated code solutions."""


@cli.command("synth")
@click.option("--config", type=str, default=None)
@click.option("--tasks", type=int, default=None)
@click.option("--solutions", type=int, default=None)
@click.option("--tests", type=int, default=None)
@click.option("--correct-rate", type=float, default=None)
@click.option("--valid-rate", type=float, default=None)
@click.option("--wrong-clusters", type=str, default=None,
              help="comma-separated sizes of agreeing-but-wrong solution groups")
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", type=str, required=True)
def cmd_synth(config, tasks, solutions, tests, correct_rate, valid_rate,
              wrong_clusters, seed, out_dir):
    """Generate a synthetic matrix corpus with planted ground truth."""
    cfgf = _load_config(config)
    spec = synth.SynthSpec(
        tasks=int(_pick(tasks, cfgf, "tasks", 10)),
        solutions_per_task=int(_pick(solutions, cfgf, "solutions", 20)),
        tests_per_task=int(_pick(tests, cfgf, "tests", 20)),
        correct_solution_rate=float(_pick(correct_rate, cfgf, "correct_rate", 0.3)),
        valid_test_rate=float(_pick(valid_rate, cfgf, "valid_rate", 0.9)),
        wrong_cluster_sizes=tuple(
            _parse_int_list(_pick(wrong_clusters, cfgf, "wrong_clusters", ""), "--wrong-clusters")
        ),
        seed=int(_pick(seed, cfgf, "seed", 0)),
    )
    matrices, truth = synth.generate(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .model import dump_matrices
    dump_matrices(out / "matrix.jsonl", matrices)
    write_jsonl(out / "truth.jsonl", truth.records())
    click.echo(f"wrote {len(matrices)} tasks to {out}")


@cli.command("group")
@click.option("--config", type=str, default=None)
@click.option("--matrix", type=str, default=None)
@click.option("--strategy", type=click.Choice(["exhaustive", "ransac"]), default=None)
@click.option("--ransac-iterations", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--drop-all-error-tests", is_flag=True, default=False)
@click.option("--out", "out_path", type=str, required=True)
def cmd_group(config, matrix, strategy, ransac_iterations, seed,
              drop_all_error_tests, out_path):
    """Form consensus sets from a matrix file."""
    cfgf = _load_config(config)
    matrices = load_matrices(_require_path(_pick(matrix, cfgf, "matrix", None), "matrix"))
    sets_by_task = _group_matrices(
        matrices,
        _pick(strategy, cfgf, "strategy", "exhaustive"),
        _pick(ransac_iterations, cfgf, "ransac_iterations", None),
        int(_pick(seed, cfgf, "seed", 0)),
        drop_all_error_tests or bool(cfgf.get("drop_all_error_tests")),
    )
    _write_consensus(Path(out_path), sets_by_task)


@cli.command("rank")
@click.option("--config", type=str, default=None)
@click.option("--matrix", type=str, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--strategy", type=click.Choice(["exhaustive", "ransac"]), default=None)
@click.option("--ransac-iterations", type=int, default=None)
@click.option("--population", type=int, default=None)
@click.option("--generations", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_path", type=str, required=True)
def cmd_rank(config, matrix, alpha, beta, strategy, ransac_iterations,
             population, generations, seed, out_path):
    """Score consensus sets and rank solutions per task."""
    cfgf = _load_config(config)
    matrices = load_matrices(_require_path(_pick(matrix, cfgf, "matrix", None), "matrix"))
    params = ScoreParams(alpha=float(_pick(alpha, cfgf, "alpha", 0.5)),
                         beta=float(_pick(beta, cfgf, "beta", 1.1)))
    ga = _ga_config(cfgf, seed, population, generations)
    sets_by_task = _group_matrices(
        matrices, _pick(strategy, cfgf, "strategy", "exhaustive"),
        _pick(ransac_iterations, cfgf, "ransac_iterations", None),
        ga.seed, bool(cfgf.get("drop_all_error_tests")))
    selections = _rank_all(sets_by_task, params, ga)
    _write_selections(Path(out_path), selections)


@cli.command("eval")
@click.option("--config", type=str, default=None)
@click.option("--matrix", type=str, default=None)
@click.option("--selections", type=str, default=None)
@click.option("--truth", type=str, default=None,
              help="truth labels file; alternative to hidden-test execution")
@click.option("--problems", type=str, default=None)
@click.option("--solutions", "solutions_path", type=str, default=None)
@click.option("--runner-cmd", type=str, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--timeout-ms", type=int, default=None)
@click.option("--k-values", type=str, default=None)
@click.option("--method", type=click.Choice(["baseline", "ranked", "both"]), default=None)
@click.option("--out", "out_dir", type=str, required=True)
def cmd_eval(config, matrix, selections, truth, problems, solutions_path,
             runner_cmd, workers, timeout_ms, k_values, method, out_dir):
    """Build pass@k reports from selections plus correctness labels."""
    cfgf = _load_config(config)
    matrices = load_matrices(_require_path(_pick(matrix, cfgf, "matrix", None), "matrix"))
    sels = _load_selections(_require_path(_pick(selections, cfgf, "selections", None), "selections"))

    truth_path = _pick(truth, cfgf, "truth", None)
    if truth_path:
        labels = synth.load_truth(_require_path(truth_path, "truth"))
        correctness = {t: labels.correctness(t) for t in labels.correct_solution_ids}
    else:
        problems_path = _require_path(_pick(problems, cfgf, "problems", None), "problems")
        sols_path = _require_path(_pick(solutions_path, cfgf, "solutions", None), "solutions")
        empty = Path(out_dir) / ".no-tests.jsonl"
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        empty.write_text("", encoding="utf-8")
        corpus = load_corpus(problems_path, sols_path, empty)
        harness_cfg = HarnessConfig(
            runner_cmd=_runner_cmd(runner_cmd, cfgf),
            workers=int(_pick(workers, cfgf, "workers", 4)),
            timeout_ms=int(_pick(timeout_ms, cfgf, "timeout_ms", 3000)),
        )
        correctness = _hidden_correctness(corpus, harness_cfg, None)

    kv = _parse_int_list(_pick(k_values, cfgf, "k_values", "1,2,10"), "--k-values")
    chosen = _pick(method, cfgf, "method", "both")
    methods = ([metrics.Method.BASELINE, metrics.Method.RANKED] if chosen == "both"
               else [metrics.Method(chosen)])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = _reports(matrices, sels, correctness, kv, methods)
    _write_reports(out, reports)
    click.echo(metrics.render_table(reports), nl=False)


@cli.command("tune")
@click.option("--config", type=str, default=None)
@click.option("--matrix", type=str, default=None)
@click.option("--truth", type=str, default=None)
@click.option("--dev-tasks", type=str, default=None,
              help="comma-separated task ids; default: every labeled task")
@click.option("--alpha-grid", type=str, default=None)
@click.option("--beta-grid", type=str, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--population", type=int, default=None)
@click.option("--generations", type=int, default=None)
def cmd_tune(config, matrix, truth, dev_tasks, alpha_grid, beta_grid, seed,
             population, generations):
    """Grid-search alpha/beta for best ranked pass@1 on a labeled dev split."""
    cfgf = _load_config(config)
    matrices = load_matrices(_require_path(_pick(matrix, cfgf, "matrix", None), "matrix"))
    labels = synth.load_truth(_require_path(_pick(truth, cfgf, "truth", None), "truth"))
    correctness = {t: labels.correctness(t) for t in labels.correct_solution_ids}
    dev = _pick(dev_tasks, cfgf, "dev_tasks", None)
    dev_ids = ([x for x in str(dev).split(",") if x] if dev
               else sorted(correctness))
    params = metrics.tune(
        matrices, correctness, dev_ids,
        _parse_float_list(_pick(alpha_grid, cfgf, "alpha_grid", "0.5"), "--alpha-grid"),
        _parse_float_list(_pick(beta_grid, cfgf, "beta_grid", "1.1"), "--beta-grid"),
        _ga_config(cfgf, seed, population, generations),
    )
    click.echo(json.dumps({"alpha": params.alpha, "beta": params.beta}))


@cli.command("run")
@click.option("--config", type=str, default=None)
@click.option("--problems", type=str, default=None)
@click.option("--solutions", "solutions_path", type=str, default=None)
@click.option("--tests", "tests_path", type=str, default=None)
@click.option("--truth", type=str, default=None)
@click.option("--runner-cmd", type=str, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--timeout-ms", type=int, default=None)
@click.option("--cache", "cache_path", type=str, default=None,
              help="matrix cache file; default <out>/matrix.jsonl")
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--strategy", type=click.Choice(["exhaustive", "ransac"]), default=None)
@click.option("--ransac-iterations", type=int, default=None)
@click.option("--drop-all-error-tests", is_flag=True, default=False)
@click.option("--population", type=int, default=None)
@click.option("--generations", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--k-values", type=str, default=None)
@click.option("--out", "out_dir", type=str, required=True)
def cmd_run(config, problems, solutions_path, tests_path, truth, runner_cmd,
            workers, timeout_ms, cache_path, alpha, beta, strategy,
            ransac_iterations, drop_all_error_tests, population, generations,
            seed, k_values, out_dir):
    """Full pipeline: execute, group, rank, and (with labels) evaluate."""
    cfgf = _load_config(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stage_marker = out / "FAILED_STAGE"
    if stage_marker.exists():
        stage_marker.unlink()

    stage = "load"
    try:
        corpus = load_corpus(
            _require_path(_pick(problems, cfgf, "problems", None), "problems"),
            _require_path(_pick(solutions_path, cfgf, "solutions", None), "solutions"),
            _require_path(_pick(tests_path, cfgf, "tests", None), "tests"),
        )
        if corpus.id_maps:
            write_jsonl(out / "id_map.jsonl", (
                {"task_id": r.task_id, "kind": r.kind,
                 "external_id": r.external_id, "internal_id": r.internal_id}
                for r in corpus.id_maps))

        stage = "execute"
        harness_cfg = HarnessConfig(
            runner_cmd=_runner_cmd(runner_cmd, cfgf),
            workers=int(_pick(workers, cfgf, "workers", 4)),
            timeout_ms=int(_pick(timeout_ms, cfgf, "timeout_ms", 3000)),
        )
        cache = warm_cache(Path(_pick(cache_path, cfgf, "cache", out / "matrix.jsonl")))
        matrices = {}
        for task_id in corpus.task_ids:
            matrices[task_id] = execute_matrix(
                corpus.problem(task_id), corpus.solutions(task_id),
                corpus.tests(task_id), harness_cfg, cache=cache)

        stage = "group"
        ga = _ga_config(cfgf, seed, population, generations)
        sets_by_task = _group_matrices(
            matrices, _pick(strategy, cfgf, "strategy", "exhaustive"),
            _pick(ransac_iterations, cfgf, "ransac_iterations", None),
            ga.seed,
            drop_all_error_tests or bool(cfgf.get("drop_all_error_tests")))
        _write_consensus(out / "consensus.jsonl", sets_by_task)

        stage = "rank"
        params = ScoreParams(alpha=float(_pick(alpha, cfgf, "alpha", 0.5)),
                             beta=float(_pick(beta, cfgf, "beta", 1.1)))
        selections = _rank_all(sets_by_task, params, ga)
        _write_selections(out / "selections.jsonl", selections)

        stage = "evaluate"
        truth_path = _pick(truth, cfgf, "truth", None)
        have_hidden = any(corpus.hidden_tests(t) for t in corpus.task_ids)
        if truth_path or have_hidden:
            if truth_path:
                labels = synth.load_truth(_require_path(truth_path, "truth"))
                correctness = {t: labels.correctness(t) for t in labels.correct_solution_ids}
            else:
                correctness = _hidden_correctness(
                    corpus, harness_cfg, out / "hidden_matrix.jsonl")
            kv = _parse_int_list(_pick(k_values, cfgf, "k_values", "1,2,10"), "--k-values")
            reports = _reports(matrices, selections, correctness, kv,
                               [metrics.Method.BASELINE, metrics.Method.RANKED])
            _write_reports(out, reports)
            click.echo(metrics.render_table(reports), nl=False)
    except Exception:
        stage_marker.write_text(stage + "\n", encoding="utf-8")
        raise


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except (DataError, FileNotFoundError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except RunnerError as exc:
        click.echo(f"runner failure: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
