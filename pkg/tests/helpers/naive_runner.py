#!/usr/bin/env python3
"""Minimal in-process protocol runner used as a harness test double.

Executes solution source plus one assertion directly in this process, so an
infinite loop hangs the runner and the harness must kill it. Magic test
strings steer failure-injection paths:

  __crash__             exit without replying
  __crash_once__:<p>    crash the first time (marker file <p>), pass after
  __garbage__           emit an unparseable line
  __wrong_id__          reply with a mismatched id
"""

import contextlib
import io
import json
import os
import sys
import time


def respond(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def main():
    for line in sys.stdin:
        try:
            req = json.loads(line)
        except json.JSONDecodeError:
            respond({"id": "unknown", "status": "error", "duration_ms": 0,
                     "detail": "unparseable request"})
            continue

        rid, code, test = req["id"], req["code"], req["test"]
        if test == "__crash__":
            sys.exit(1)
        if test.startswith("__crash_once__:"):
            marker = test.split(":", 1)[1]
            if not os.path.exists(marker):
                open(marker, "w").close()
                sys.exit(1)
            respond({"id": rid, "status": "pass", "duration_ms": 1})
            continue
        if test == "__garbage__":
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        if test == "__wrong_id__":
            respond({"id": "nope", "status": "pass", "duration_ms": 1})
            continue

        start = time.monotonic()
        ns = {}
        detail = None
        try:
            with contextlib.redirect_stdout(io.StringIO()):
                exec(compile(code, "<solution>", "exec"), ns)
                try:
                    exec(compile(test, "<assertion>", "exec"), ns)
                    status = "pass"
                except AssertionError:
                    status = "fail"
        except BaseException as exc:  # noqa: BLE001 - candidate code may raise anything
            status = "error"
            detail = f"{type(exc).__name__}: {exc}"[:200]
        duration = int((time.monotonic() - start) * 1000)
        out = {"id": rid, "status": status, "duration_ms": duration}
        if detail:
            out["detail"] = detail
        respond(out)


if __name__ == "__main__":
    main()
