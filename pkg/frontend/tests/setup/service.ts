/** Spawns a real service instance (synthetic dataset + mock assistant
 * provider) for the contract tests, and tears it down afterwards. */

import { spawn, execFileSync, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export const PORT = 8977;
export const BASE = `http://127.0.0.1:${PORT}`;

let proc: ChildProcess | null = null;
let workdir = "";

export async function setup() {
  workdir = mkdtempSync(join(tmpdir(), "workbench-e2e-"));
  execFileSync("python3", ["-c",
    `from tempoql.synthetic import write_icu_dataset; ` +
    `write_icu_dataset(${JSON.stringify(workdir)}, n_traj=30, seed=7)`]);
  const providerPath = join(workdir, "provider.json");
  writeFileSync(providerPath, JSON.stringify({
    type: "mock",
    script: [
      { tool_calls: [{ id: "c1", name: "search_concepts",
                       arguments: { query: "respiratory" } }] },
      { content: "Here you go:\n```tempoql\n{Respiratory Rate; scope = chartevents}\n```" },
    ],
  }));
  proc = spawn("tempoql", [
    "serve", "--dataset", join(workdir, "dataset_spec.json"),
    "--port", String(PORT), "--store", join(workdir, "store.json"),
    "--provider-config", providerPath,
  ], { stdio: "ignore" });

  const deadline = Date.now() + 90_000;
  for (;;) {
    try {
      const resp = await fetch(`${BASE}/api/meta`);
      if (resp.ok) break;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) throw new Error("service did not start");
    await new Promise((r) => setTimeout(r, 400));
  }
}

export async function teardown() {
  proc?.kill();
  if (workdir) rmSync(workdir, { recursive: true, force: true });
}
