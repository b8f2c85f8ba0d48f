"""Core domain types: problems, candidates, tests, outcomes, and the corpus.

All file formats are line-delimited JSON (one object per line, UTF-8); the
exact keys are documented in the README and mirrored by the CLI.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import DataError


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class Outcome:
    """Result of running one solution against one assertion."""

    status: Status
    duration_ms: int = 0
    detail: str | None = None

    def __post_init__(self):
        if self.duration_ms < 0:
            raise DataError(f"negative duration_ms: {self.duration_ms}")
        if self.detail is not None and len(self.detail.encode("utf-8")) > 512:
            # keep diagnostics bounded; truncate on the byte budget
            raw = self.detail.encode("utf-8")[:512]
            object.__setattr__(self, "detail", raw.decode("utf-8", "ignore"))


@dataclass(frozen=True)
class Problem:
    task_id: str
    prompt: str
    entry_point: str
    # ground-truth assertions; read only through Corpus.hidden_tests so the
    # consensus/ranking code paths never see them
    hidden_tests: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.entry_point:
            raise DataError(f"{self.task_id}: empty entry_point")


@dataclass(frozen=True)
class CandidateSolution:
    task_id: str
    solution_id: int
    source: str


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # keep pytest from collecting this dataclass

    task_id: str
    test_id: int
    assertion: str


@dataclass(frozen=True)
class ScoreParams:
    """Exponents weighting solution count (alpha) and test count (beta)."""

    alpha: float = 0.5
    beta: float = 1.1

    def __post_init__(self):
        for name, v in (("alpha", self.alpha), ("beta", self.beta)):
            if not (math.isfinite(v) and v >= 0.0):
                raise DataError(f"{name} must be finite and >= 0, got {v!r}")


class ExecutionMatrix:
    """Total map from (solution_id, test_id) to Outcome for one task."""

    def __init__(self, task_id: str, n_solutions: int, n_tests: int,
                 cells: Mapping[tuple[int, int], Outcome]):
        self.task_id = task_id
        self.n_solutions = n_solutions
        self.n_tests = n_tests
        self.cells = dict(cells)
        expected = n_solutions * n_tests
        if len(self.cells) != expected:
            raise DataError(
                f"{task_id}: matrix not total, {len(self.cells)} of {expected} cells"
            )
        for (s, t) in self.cells:
            if not (0 <= s < n_solutions and 0 <= t < n_tests):
                raise DataError(f"{task_id}: cell ({s},{t}) out of range")

    def __getitem__(self, key: tuple[int, int]) -> Outcome:
        return self.cells[key]

    def pass_set(self, solution_id: int) -> frozenset[int]:
        """Test ids this solution passes."""
        return frozenset(
            t for t in range(self.n_tests)
            if self.cells[(solution_id, t)].status is Status.PASS
        )

    def drop_tests(self, test_ids: set[int]) -> "ExecutionMatrix":
        """New matrix without the given test columns, test ids re-densified."""
        keep = [t for t in range(self.n_tests) if t not in test_ids]
        remap = {t: i for i, t in enumerate(keep)}
        cells = {
            (s, remap[t]): o
            for (s, t), o in self.cells.items() if t in remap
        }
        return ExecutionMatrix(self.task_id, self.n_solutions, len(keep), cells)

    def __eq__(self, other):
        return (isinstance(other, ExecutionMatrix)
                and self.task_id == other.task_id
                and self.n_solutions == other.n_solutions
                and self.n_tests == other.n_tests
                and self.cells == other.cells)


def source_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class IdRemap:
    """Maps external (input-file) ids to the dense internal ids."""

    task_id: str
    kind: str  # "solution" or "test"
    external_id: str
    internal_id: int


class Corpus:
    """Immutable bundle of problems with their candidate solutions and tests.

    Hidden tests are reachable only through hidden_tests(); the consensus and
    ranking modules take matrices and sets, never a Corpus, so ground truth
    cannot leak into the selection.
    """

    def __init__(self, problems: dict[str, Problem],
                 solutions: dict[str, list[CandidateSolution]],
                 tests: dict[str, list[TestCase]],
                 id_maps: list[IdRemap] | None = None):
        self._problems = problems
        self._solutions = solutions
        self._tests = tests
        self.id_maps = id_maps or []

    @property
    def task_ids(self) -> list[str]:
        return sorted(self._problems)

    def problem(self, task_id: str) -> Problem:
        return self._problems[task_id]

    def solutions(self, task_id: str) -> list[CandidateSolution]:
        return self._solutions.get(task_id, [])

    def tests(self, task_id: str) -> list[TestCase]:
        return self._tests.get(task_id, [])

    def hidden_tests(self, task_id: str) -> tuple[str, ...]:
        return self._problems[task_id].hidden_tests

    def __eq__(self, other):
        return (isinstance(other, Corpus)
                and self._problems == other._problems
                and self._solutions == other._solutions
                and self._tests == other._tests)


def _read_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: malformed line: {exc}") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{path}:{lineno}: expected an object")
            yield lineno, obj


def write_jsonl(path: Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _require(obj: dict, key: str, path: Path, lineno: int):
    if key not in obj:
        raise DataError(f"{path}:{lineno}: missing key {key!r}")
    return obj[key]


def load_corpus(problems_path: str | Path, solutions_path: str | Path,
                tests_path: str | Path) -> Corpus:
    """Load and cross-reference a corpus from three JSONL files.

    Sparse or string solution/test ids are remapped to dense 0..n-1 in order
    of first appearance; the remap table is kept on the corpus so external
    ids stay traceable.
    """
    problems_path, solutions_path, tests_path = (
        Path(problems_path), Path(solutions_path), Path(tests_path))

    problems: dict[str, Problem] = {}
    for lineno, obj in _read_jsonl(problems_path):
        task_id = str(_require(obj, "task_id", problems_path, lineno))
        if task_id in problems:
            raise DataError(f"{problems_path}:{lineno}: duplicate task_id {task_id!r}")
        problems[task_id] = Problem(
            task_id=task_id,
            prompt=str(obj.get("prompt", "")),
            entry_point=str(_require(obj, "entry_point", problems_path, lineno)),
            hidden_tests=tuple(obj.get("hidden_tests") or ()),
        )

    id_maps: list[IdRemap] = []

    def load_items(path: Path, id_key: str, payload_key: str, kind: str):
        per_task: dict[str, list] = {t: [] for t in problems}
        seen: dict[tuple[str, str], int] = {}
        for lineno, obj in _read_jsonl(path):
            task_id = str(_require(obj, "task_id", path, lineno))
            if task_id not in problems:
                raise DataError(f"{path}:{lineno}: orphan task_id {task_id!r}")
            payload = str(_require(obj, payload_key, path, lineno))
            ext = obj.get(id_key)
            ext_key = str(ext) if ext is not None else f"__line{lineno}"
            if ext is not None and (task_id, ext_key) in seen:
                raise DataError(
                    f"{path}:{lineno}: duplicate ({task_id!r}, {id_key}={ext_key})")
            internal = len(per_task[task_id])
            seen[(task_id, ext_key)] = internal
            if ext is not None and str(ext) != str(internal):
                id_maps.append(IdRemap(task_id, kind, ext_key, internal))
            per_task[task_id].append((internal, payload))
        return per_task

    raw_solutions = load_items(solutions_path, "solution_id", "completion", "solution")
    raw_tests = load_items(tests_path, "test_id", "assertion", "test")

    solutions = {
        t: [CandidateSolution(t, i, src) for i, src in items]
        for t, items in raw_solutions.items()
    }
    tests = {
        t: [TestCase(t, i, a) for i, a in items]
        for t, items in raw_tests.items()
    }
    return Corpus(problems, solutions, tests, id_maps)


def dump_corpus(corpus: Corpus, problems_path: str | Path,
                solutions_path: str | Path, tests_path: str | Path) -> None:
    """Inverse of load_corpus; the written files re-parse to an equal corpus."""
    write_jsonl(Path(problems_path), (
        {
            "task_id": p.task_id,
            "prompt": p.prompt,
            "entry_point": p.entry_point,
            **({"hidden_tests": list(p.hidden_tests)} if p.hidden_tests else {}),
        }
        for p in (corpus.problem(t) for t in corpus.task_ids)
    ))
    write_jsonl(Path(solutions_path), (
        {"task_id": s.task_id, "solution_id": s.solution_id, "completion": s.source}
        for t in corpus.task_ids for s in corpus.solutions(t)
    ))
    write_jsonl(Path(tests_path), (
        {"task_id": tc.task_id, "test_id": tc.test_id, "assertion": tc.assertion}
        for t in corpus.task_ids for tc in corpus.tests(t)
    ))


def dump_matrices(path: str | Path, matrices: Mapping[str, ExecutionMatrix],
                  solution_hashes: Mapping[str, list[str]] | None = None,
                  assertion_hashes: Mapping[str, list[str]] | None = None) -> None:
    """Write matrices in the cache record format (one cell per line)."""
    def records():
        for task_id in sorted(matrices):
            m = matrices[task_id]
            for (s, t) in sorted(m.cells):
                o = m.cells[(s, t)]
                yield {
                    "task_id": task_id,
                    "solution_id": s,
                    "test_id": t,
                    "status": o.status.value,
                    "duration_ms": o.duration_ms,
                    "source_hash": (solution_hashes or {}).get(task_id, [""] * m.n_solutions)[s],
                    "assertion_hash": (assertion_hashes or {}).get(task_id, [""] * m.n_tests)[t],
                }
    write_jsonl(Path(path), records())


def load_matrices(path: str | Path) -> dict[str, ExecutionMatrix]:
    """Read matrices written by dump_matrices (or the execution cache)."""
    path = Path(path)
    cells: dict[str, dict[tuple[int, int], Outcome]] = {}
    for lineno, obj in _read_jsonl(path):
        task_id = str(_require(obj, "task_id", path, lineno))
        try:
            s = int(obj["solution_id"])
            t = int(obj["test_id"])
            status = Status(obj["status"])
        except (KeyError, ValueError) as exc:
            raise DataError(f"{path}:{lineno}: bad matrix record: {exc}") from exc
        cells.setdefault(task_id, {})[(s, t)] = Outcome(
            status=status,
            duration_ms=int(obj.get("duration_ms", 0)),
            detail=obj.get("detail"),
        )
    out = {}
    for task_id, cc in cells.items():
        n_s = 1 + max(s for s, _ in cc)
        n_t = 1 + max(t for _, t in cc)
        out[task_id] = ExecutionMatrix(task_id, n_s, n_t, cc)
    return out
