/**
 * Line-delimited protocol loop: one JSON request per stdin line, one JSON
 * response per stdout line, flushed immediately. No state survives a
 * request: every execution happens in its own python child process.
 */
import { createInterface } from 'node:readline';
import { runRequest, RunnerRequest, RunnerResponse } from './execute.js';

function isRequest(obj: unknown): obj is RunnerRequest {
  if (typeof obj !== 'object' || obj === null) return false;
  const r = obj as Record<string, unknown>;
  return (
    typeof r.id === 'string' &&
    typeof r.code === 'string' &&
    typeof r.test === 'string' &&
    typeof r.timeout_ms === 'number' &&
    r.timeout_ms >= 1
  );
}

const rl = createInterface({ input: process.stdin, terminal: false });
let pending: Promise<void> = Promise.resolve();

function respond(resp: RunnerResponse): void {
  process.stdout.write(JSON.stringify(resp) + '\n');
}

rl.on('line', (line) => {
  if (line.trim() === '') return;
  pending = pending.then(async () => {
    let req: RunnerRequest | null = null;
    try {
      const parsed = JSON.parse(line);
      if (isRequest(parsed)) req = parsed;
    } catch {
      // fall through to the error response
    }
    if (req === null) {
      respond({ id: 'unknown', status: 'error', duration_ms: 0, detail: 'unparseable request' });
      return;
    }
    respond(await runRequest(req));
  });
});

rl.on('close', () => {
  void pending.then(() => process.exit(0));
});
