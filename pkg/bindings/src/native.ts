/**
 * Transport layer: each call spawns the solver package's JSON bridge
 * (`python -m fracgm.rpc`), writes requests to stdin, and reads responses
 * from stdout. Running in a separate process means a bound call never holds
 * any interpreter lock on the JavaScript side, and inputs are copied across
 * the boundary by serialization (no shared mutable state).
 *
 * Numbers survive the round trip exactly: both runtimes are IEEE-754 double
 * and both print shortest round-trip decimals.
 */
import { spawnSync } from "node:child_process";

/** Error reported by the native solver, carrying its stable error code. */
export class NativeError extends Error {
  constructor(
    readonly code: string,
    message: string,
  ) {
    super(`[${code}] ${message}`);
    this.name = "NativeError";
  }
}

let pythonCommand = "python3";

/** Override the interpreter used to reach the solver package. */
export function setPythonCommand(command: string): void {
  pythonCommand = command;
}

type RawResponse =
  | { ok: true; result: unknown }
  | { ok: false; error: { code: string; message: string } };

function unwrap(response: RawResponse): unknown {
  if (!response.ok) {
    throw new NativeError(response.error.code, response.error.message);
  }
  return response.result;
}

/** Run a batch of requests in one bridge process; one result per request. */
export function runNative(requests: object[]): unknown[] {
  const proc = spawnSync(pythonCommand, ["-m", "fracgm.rpc"], {
    input: JSON.stringify(requests),
    encoding: "utf8",
    maxBuffer: 1024 * 1024 * 1024,
  });
  if (proc.error) {
    throw new NativeError("spawn-failed", String(proc.error));
  }
  if (!proc.stdout) {
    throw new NativeError(
      "spawn-failed",
      `bridge produced no output (exit ${proc.status}): ${proc.stderr}`,
    );
  }
  const parsed = JSON.parse(proc.stdout) as RawResponse[];
  return parsed.map(unwrap);
}

/** Run a single request; throws NativeError on in-band failures. */
export function callNative(request: object): unknown {
  const results = runNative([request]);
  return results[0];
}
