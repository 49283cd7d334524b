/**
 * Process bridge to the videomix command-line tool.
 *
 * Every operation goes through the CLI and the on-disk container/sidecar
 * formats; nothing here links against Python objects directly.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { delimiter, dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

export class CliError extends Error {
  constructor(message: string, readonly status: number | null,
              readonly stderr: string) {
    super(message);
  }
}

const moduleDir = dirname(fileURLToPath(import.meta.url));
const repoRoot = resolve(moduleDir, "..", "..");
const pythonPath = join(repoRoot, "src");

/** Command used to invoke the CLI; override with VIDEOMIX_CLI. */
export function cliCommand(): string[] {
  const override = process.env.VIDEOMIX_CLI;
  if (override && override.trim() !== "") {
    return override.trim().split(/\s+/);
  }
  return ["python3", "-m", "videomix.cli"];
}

/** Run one CLI invocation and return its stdout; throw CliError on failure. */
export function runCli(args: string[]): string {
  const [cmd, ...base] = cliCommand();
  const existing = process.env.PYTHONPATH;
  const env = {
    ...process.env,
    PYTHONPATH: existing ? pythonPath + delimiter + existing : pythonPath,
  };
  const result = spawnSync(cmd, [...base, ...args], { env, encoding: "utf8" });
  if (result.error) {
    throw new CliError(`failed to spawn ${cmd}: ${result.error.message}`,
                       null, "");
  }
  if (result.status !== 0) {
    throw new CliError(
      `${cmd} exited with status ${result.status}: ${result.stderr}`,
      result.status, result.stderr ?? "",
    );
  }
  return result.stdout;
}

/** Run fn with a fresh scratch directory, removing it afterwards. */
export function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "videomix-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
