"""pass@k evaluation: unbiased estimator, ranked top-k, reports, and tuning.

Correctness is judged against hidden reference tests only; a solution is
correct iff it passes all of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .consensus import group_exhaustive
from .errors import DataError
from .evorank import GaConfig, RankedSelection, rank, select_top_k
from .model import ExecutionMatrix, ScoreParams, Status


class Method(str, Enum):
    BASELINE = "baseline"  # unbiased estimator over random draws
    RANKED = "ranked"      # deterministic top-k of the GA selection


@dataclass(frozen=True)
class CorrectnessVector:
    task_id: str
    correct: frozenset[int]


@dataclass
class PassAtKReport:
    method: Method
    k_values: list[int]
    per_task: dict[str, dict[int, float]]
    aggregate: dict[int, float]  # percent, mean over tasks

    def to_record(self) -> dict:
        return {
            "method": self.method.value,
            "k_values": self.k_values,
            "per_task": {
                t: {str(k): v for k, v in row.items()}
                for t, row in sorted(self.per_task.items())
            },
            "aggregate": {str(k): v for k, v in self.aggregate.items()},
        }


def pass_at_k_unbiased(n: int, c: int, k: int) -> float:
    """1 - C(n-c, k) / C(n, k), in stable product form (no factorials)."""
    if k < 1 or n < 1:
        raise DataError(f"n and k must be >= 1, got n={n}, k={k}")
    if k > n:
        raise DataError(f"k={k} exceeds n={n}")
    if not 0 <= c <= n:
        raise DataError(f"c={c} out of range for n={n}")
    if c == 0:
        return 0.0
    if n - c < k:
        return 1.0
    return float(1.0 - np.prod(1.0 - k / np.arange(n - c + 1, n + 1, dtype=np.float64)))


def pass_at_k_ranked(sel: RankedSelection, correct: CorrectnessVector, k: int) -> int:
    """1 iff any of the top-k ranked solutions is correct."""
    if sel.task_id != correct.task_id:
        raise DataError(f"task mismatch: {sel.task_id} vs {correct.task_id}")
    return int(bool(set(select_top_k(sel, k)) & correct.correct)) if sel.order else 0


def correctness_from_matrix(task_id: str, matrix: ExecutionMatrix) -> CorrectnessVector:
    """Correct = passes every hidden-test column of the given matrix."""
    correct = frozenset(
        s for s in range(matrix.n_solutions)
        if all(matrix[(s, t)].status is Status.PASS for t in range(matrix.n_tests))
    )
    return CorrectnessVector(task_id=task_id, correct=correct)


def build_report(n_samples: Mapping[str, int],
                 selections: Mapping[str, RankedSelection],
                 correctness: Mapping[str, CorrectnessVector],
                 k_values: Sequence[int],
                 method: Method) -> PassAtKReport:
    """Aggregate per-task pass@k into a report row per k.

    n_samples gives the sample-pool size n per task (baseline rows need it;
    ranked rows only clamp k against it).
    """
    if not k_values:
        raise DataError("k_values must be non-empty")
    tasks = sorted(n_samples)
    missing = [t for t in tasks if t not in correctness]
    if method is Method.RANKED:
        missing += [t for t in tasks if t not in selections]
    if missing:
        raise DataError(f"missing per-task inputs for: {sorted(set(missing))}")

    per_task: dict[str, dict[int, float]] = {}
    for t in tasks:
        n = n_samples[t]
        c = len(correctness[t].correct)
        row = {}
        for k in k_values:
            if n == 0:
                row[k] = 0.0
            elif method is Method.BASELINE:
                row[k] = pass_at_k_unbiased(n, c, min(k, n))
            else:
                row[k] = float(pass_at_k_ranked(selections[t], correctness[t], k))
        per_task[t] = row

    aggregate = {
        k: 100.0 * sum(per_task[t][k] for t in tasks) / len(tasks) if tasks else 0.0
        for k in k_values
    }
    return PassAtKReport(method, list(k_values), per_task, aggregate)


def render_table(reports: Sequence[PassAtKReport]) -> str:
    """Aligned text table, one row per method, one column per k."""
    if not reports:
        return ""
    k_values = reports[0].k_values
    header = ["method"] + [f"pass@{k}" for k in k_values]
    rows = [
        [r.method.value] + [f"{r.aggregate[k]:.1f}" for k in k_values]
        for r in reports
    ]
    widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
    lines = []
    for row in [header] + rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def tune(matrices: Mapping[str, ExecutionMatrix],
         correctness: Mapping[str, CorrectnessVector],
         dev_task_ids: Sequence[str],
         alpha_grid: Sequence[float],
         beta_grid: Sequence[float],
         cfg: GaConfig) -> ScoreParams:
    """Grid search (alpha, beta) maximizing mean ranked pass@1 on dev tasks.

    Ties break toward smaller beta, then smaller alpha.
    """
    if not alpha_grid or not beta_grid:
        raise DataError("alpha_grid and beta_grid must be non-empty")
    if not dev_task_ids:
        raise DataError("dev_task_ids must be non-empty")
    missing = [t for t in dev_task_ids if t not in correctness or t not in matrices]
    if missing:
        raise DataError(f"dev tasks without matrix or correctness labels: {missing}")

    sets_by_task = {t: group_exhaustive(matrices[t]) for t in dev_task_ids}

    best: tuple[float, float, float] | None = None  # (-pass1, beta, alpha)
    best_params = None
    for alpha in alpha_grid:
        for beta in beta_grid:
            params = ScoreParams(alpha=alpha, beta=beta)
            hits = 0
            for t in dev_task_ids:
                sel = rank(t, sets_by_task[t], params, cfg)
                hits += pass_at_k_ranked(sel, correctness[t], 1)
            key = (-hits / len(dev_task_ids), beta, alpha)
            if best is None or key < best:
                best = key
                best_params = params
    return best_params
