"""Out-of-process execution of (solution, test) cells.

Each worker thread owns one runner subprocess and keeps exactly one request
in flight, so crashes are unambiguously attributable. The wire protocol is
one JSON object per line on the runner's stdin/stdout:

  request:  {"id", "code", "test", "entry_point", "timeout_ms"}
  response: {"id", "status", "duration_ms", "detail"?}

The harness enforces the wall-clock budget itself (kills the runner on
overrun); well-behaved runners also self-enforce it as a backstop. Results
are keyed by cell, never appended, so the matrix is independent of worker
count and scheduling.
"""

from __future__ import annotations

import itertools
import json
import logging
import select
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from queue import Empty, Queue

from .errors import DataError, RunnerError
from .model import (CandidateSolution, ExecutionMatrix, Outcome, Problem,
                    Status, TestCase, source_hash)

log = logging.getLogger(__name__)

# grace added to the per-cell budget before the harness kills the runner,
# letting a self-enforcing runner report its own timeout first
_KILL_SLACK_S = 0.5


@dataclass(frozen=True)
class RunnerRequest:
    id: str
    code: str
    test: str
    entry_point: str
    timeout_ms: int

    def to_line(self) -> str:
        return json.dumps({
            "id": self.id,
            "code": self.code,
            "test": self.test,
            "entry_point": self.entry_point,
            "timeout_ms": self.timeout_ms,
        }) + "\n"


@dataclass(frozen=True)
class RunnerResponse:
    id: str
    status: Status
    duration_ms: int
    detail: str | None = None


@dataclass(frozen=True)
class HarnessConfig:
    runner_cmd: str | tuple[str, ...]
    workers: int = 4
    timeout_ms: int = 3000
    cache_path: str | Path | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise DataError("workers must be >= 1")
        if self.timeout_ms < 1:
            raise DataError("timeout_ms must be >= 1")

    def argv(self) -> list[str]:
        if isinstance(self.runner_cmd, str):
            return shlex.split(self.runner_cmd)
        return list(self.runner_cmd)


class MatrixCache:
    """Persistent cell cache keyed by (task_id, source_hash, assertion_hash).

    Pass/Fail/Error entries are reused at any budget; Timeout entries only at
    the budget they were observed under.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[tuple[str, str, str], dict] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        obj = json.loads(line)
                        key = (str(obj["task_id"]), str(obj["source_hash"]),
                               str(obj["assertion_hash"]))
                        Status(obj["status"])
                    except (json.JSONDecodeError, KeyError, ValueError):
                        log.warning("skipping corrupt cache line %s:%d", self.path, lineno)
                        continue
                    self._entries[key] = obj

    def lookup(self, task_id: str, src_hash: str, assert_hash: str,
               timeout_ms: int) -> Outcome | None:
        entry = self._entries.get((task_id, src_hash, assert_hash))
        if entry is None:
            return None
        status = Status(entry["status"])
        if status is Status.TIMEOUT and int(entry.get("timeout_ms", -1)) != timeout_ms:
            return None
        return Outcome(status, int(entry.get("duration_ms", 0)), entry.get("detail"))

    def add(self, task_id: str, solution_id: int, test_id: int,
            src_hash: str, assert_hash: str, outcome: Outcome, timeout_ms: int) -> None:
        record = {
            "task_id": task_id,
            "solution_id": solution_id,
            "test_id": test_id,
            "status": outcome.status.value,
            "duration_ms": outcome.duration_ms,
            "source_hash": src_hash,
            "assertion_hash": assert_hash,
            "timeout_ms": timeout_ms,
        }
        if outcome.detail:
            record["detail"] = outcome.detail
        with self._lock:
            self._entries[(task_id, src_hash, assert_hash)] = record
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")


def warm_cache(matrix_path: str | Path) -> MatrixCache:
    """Open (or create) a persistent matrix cache."""
    path = Path(matrix_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return MatrixCache(path)


class _Runner:
    """One runner subprocess with a single request in flight."""

    def __init__(self, argv: list[str]):
        self.argv = argv
        self.proc: subprocess.Popen | None = None

    def ensure(self) -> None:
        if self.proc is None or self.proc.poll() is not None:
            try:
                self.proc = subprocess.Popen(
                    self.argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.DEVNULL,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise RunnerError(f"cannot spawn runner {self.argv!r}: {exc}") from exc

    def kill(self) -> None:
        if self.proc is not None:
            try:
                self.proc.kill()
                self.proc.wait()
            except OSError:
                pass
            self.proc = None

    def roundtrip(self, request: RunnerRequest, deadline_s: float) -> tuple[str, dict | None]:
        """Returns (kind, payload): kind in {ok, timeout, crash, protocol}."""
        self.ensure()
        assert self.proc is not None
        try:
            self.proc.stdin.write(request.to_line())
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            return "crash", None

        end = time.monotonic() + deadline_s
        buf = ""
        while True:
            remaining = end - time.monotonic()
            if remaining <= 0:
                return "timeout", None
            ready, _, _ = select.select([self.proc.stdout], [], [], remaining)
            if not ready:
                return "timeout", None
            chunk = self.proc.stdout.readline()
            if chunk == "":
                return "crash", None
            buf = chunk
            try:
                obj = json.loads(buf)
            except json.JSONDecodeError:
                return "protocol", None
            if not isinstance(obj, dict) or obj.get("id") != request.id:
                return "protocol", None
            return "ok", obj


def _outcome_from_response(obj: dict) -> Outcome | None:
    try:
        status = Status(obj["status"])
        duration = max(0, int(obj.get("duration_ms", 0)))
    except (KeyError, ValueError, TypeError):
        return None
    detail = obj.get("detail")
    return Outcome(status, duration, str(detail) if detail is not None else None)


_request_ids = itertools.count()


def execute_matrix(task: Problem, solutions: list[CandidateSolution],
                   tests: list[TestCase], cfg: HarnessConfig,
                   cache: MatrixCache | None = None,
                   stats: dict | None = None) -> ExecutionMatrix:
    """Run every (solution, test) cell and return the total matrix.

    Cached cells are reused byte-identically; an empty grid spawns no runner.
    A runner crash retries the in-flight cell once before marking it Error;
    protocol violations mark the cell Error without retry.
    """
    for s in solutions:
        if s.task_id != task.task_id:
            raise DataError(f"solution {s.solution_id} belongs to {s.task_id}, not {task.task_id}")
    for t in tests:
        if t.task_id != task.task_id:
            raise DataError(f"test {t.test_id} belongs to {t.task_id}, not {task.task_id}")

    if cache is None and cfg.cache_path is not None:
        cache = warm_cache(cfg.cache_path)

    src_hashes = {s.solution_id: source_hash(s.source) for s in solutions}
    assert_hashes = {t.test_id: source_hash(t.assertion) for t in tests}

    cells: dict[tuple[int, int], Outcome] = {}
    jobs: list[tuple[CandidateSolution, TestCase]] = []
    for s in solutions:
        for t in tests:
            hit = cache.lookup(task.task_id, src_hashes[s.solution_id],
                               assert_hashes[t.test_id], cfg.timeout_ms) if cache else None
            if hit is not None:
                cells[(s.solution_id, t.test_id)] = hit
            else:
                jobs.append((s, t))

    if stats is not None:
        stats["cached"] = len(cells)
        stats["executed"] = len(jobs)

    if jobs:
        queue: Queue = Queue()
        for job in jobs:
            queue.put(job)
        results: dict[tuple[int, int], Outcome] = {}
        lock = threading.Lock()
        spawn_error: list[RunnerError] = []
        deadline_s = cfg.timeout_ms / 1000.0 + _KILL_SLACK_S

        def worker():
            runner = _Runner(cfg.argv())
            try:
                while True:
                    try:
                        sol, tc = queue.get_nowait()
                    except Empty:
                        return
                    outcome = _run_cell(runner, task, sol, tc, cfg, deadline_s)
                    with lock:
                        results[(sol.solution_id, tc.test_id)] = outcome
                    if cache is not None:
                        cache.add(task.task_id, sol.solution_id, tc.test_id,
                                  src_hashes[sol.solution_id],
                                  assert_hashes[tc.test_id], outcome, cfg.timeout_ms)
            except RunnerError as exc:
                with lock:
                    spawn_error.append(exc)
            finally:
                runner.kill()

        threads = [threading.Thread(target=worker, daemon=True)
                   for _ in range(min(cfg.workers, len(jobs)))]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        if spawn_error:
            raise spawn_error[0]
        if len(results) != len(jobs):
            raise RunnerError("harness lost track of in-flight cells")
        cells.update(results)

    return ExecutionMatrix(task.task_id, len(solutions), len(tests), cells)


def _run_cell(runner: _Runner, task: Problem, sol: CandidateSolution,
              tc: TestCase, cfg: HarnessConfig, deadline_s: float) -> Outcome:
    attempts = 0
    while True:
        request = RunnerRequest(
            id=f"{task.task_id}#{sol.solution_id}#{tc.test_id}#{next(_request_ids)}",
            code=sol.source,
            test=tc.assertion,
            entry_point=task.entry_point,
            timeout_ms=cfg.timeout_ms,
        )
        started = time.monotonic()
        kind, obj = runner.roundtrip(request, deadline_s)
        elapsed_ms = int((time.monotonic() - started) * 1000)
        if kind == "ok":
            outcome = _outcome_from_response(obj)
            if outcome is not None:
                return outcome
            kind = "protocol"
        if kind == "timeout":
            runner.kill()
            return Outcome(Status.TIMEOUT, max(elapsed_ms, cfg.timeout_ms),
                           f"no response within {cfg.timeout_ms} ms")
        if kind == "protocol":
            runner.kill()
            return Outcome(Status.ERROR, elapsed_ms, "runner protocol violation")
        # crash: respawn and retry once
        runner.kill()
        attempts += 1
        if attempts > 1:
            return Outcome(Status.ERROR, elapsed_ms, "runner crashed twice on this cell")
