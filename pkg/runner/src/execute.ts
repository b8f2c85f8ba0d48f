import { spawn } from 'node:child_process';

export interface RunnerRequest {
  id: string;
  code: string;
  test: string;
  entry_point: string;
  timeout_ms: number;
}

export type RunStatus = 'pass' | 'fail' | 'error' | 'timeout';

export interface RunnerResponse {
  id: string;
  status: RunStatus;
  duration_ms: number;
  detail?: string;
}

// Exit codes chosen by the driver; anything else (including a candidate
// calling sys.exit) is an error. The sentinel on stderr guards against
// candidate code that fakes a clean exit via os._exit(0).
const EXIT_FAIL = 13;
const EXIT_ERROR = 14;
const SENTINEL = '__RUNNER_OK__';

// Runs inside a fresh python child per request: the solution source first,
// then the single assertion, in the same namespace so the assertion sees the
// declared entry point. AssertionError from the assertion itself is the only
// thing that counts as "fail".
const DRIVER = `
import json, sys
payload = json.load(sys.stdin)
ns = {}
try:
    exec(compile(payload["code"], "<solution>", "exec"), ns)
except BaseException as exc:
    sys.stderr.write(f"{type(exc).__name__}: {exc}")
    sys.exit(${EXIT_ERROR})
try:
    exec(compile(payload["test"], "<assertion>", "exec"), ns)
except AssertionError:
    sys.exit(${EXIT_FAIL})
except BaseException as exc:
    sys.stderr.write(f"{type(exc).__name__}: {exc}")
    sys.exit(${EXIT_ERROR})
sys.stderr.write("${SENTINEL}")
sys.exit(0)
`;

const PYTHON = process.env.RUNNER_PYTHON ?? 'python3';

export function runRequest(req: RunnerRequest): Promise<RunnerResponse> {
  return new Promise((resolve) => {
    const started = Date.now();
    const child = spawn(PYTHON, ['-c', DRIVER], {
      stdio: ['pipe', 'ignore', 'pipe'],
    });

    let stderr = '';
    let timedOut = false;
    let settled = false;

    const timer = setTimeout(() => {
      timedOut = true;
      child.kill('SIGKILL');
    }, Math.max(1, req.timeout_ms));

    const finish = (resp: RunnerResponse) => {
      if (settled) return;
      settled = true;
      clearTimeout(timer);
      resolve(resp);
    };

    child.stderr.on('data', (chunk: Buffer) => {
      if (stderr.length < 4096) stderr += chunk.toString('utf-8');
    });

    child.on('error', (err) => {
      finish({
        id: req.id,
        status: 'error',
        duration_ms: Date.now() - started,
        detail: `cannot spawn ${PYTHON}: ${err.message}`,
      });
    });

    child.on('close', (code) => {
      const duration = Date.now() - started;
      if (timedOut) {
        finish({ id: req.id, status: 'timeout', duration_ms: duration });
        return;
      }
      let status: RunStatus;
      if (code === 0 && stderr.includes(SENTINEL)) {
        status = 'pass';
      } else if (code === EXIT_FAIL) {
        status = 'fail';
      } else {
        status = 'error';
      }
      const detail =
        status === 'error' ? stderr.replace(SENTINEL, '').slice(0, 200) || undefined : undefined;
      finish({ id: req.id, status, duration_ms: duration, ...(detail ? { detail } : {}) });
    });

    child.stdin.on('error', () => {
      // child died before reading its input; close handler decides the status
    });
    child.stdin.write(JSON.stringify({ code: req.code, test: req.test }));
    child.stdin.end();
  });
}
