import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

const HERE = dirname(fileURLToPath(import.meta.url));
export const PYTHON = process.env.DNAPLAN_PYTHON ?? "python3";
export const PYTHONPATH =
  process.env.DNAPLAN_PYTHONPATH ?? resolve(HERE, "../../src");

/** Deterministic 32-bit PRNG so the parity corpus is stable. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randomProfile(seed: number, nPoints: number) {
  const rand = mulberry32(seed);
  const grid = Array.from({ length: nPoints }, (_, i) => i / (nPoints - 1));
  const values = Array.from({ length: nPoints }, () => rand());
  return { grid, values };
}

export function decayingProfile(nPoints: number, rate: number) {
  const grid = Array.from({ length: nPoints }, (_, i) => i / (nPoints - 1));
  const denom = Math.exp(rate) - 1;
  const values = grid.map((t) => (Math.exp(rate * t) - 1) / denom);
  return { grid, values };
}

/** Run the CLI directly, the way a shell user would, and parse its output. */
export function cliPlan(
  grid: number[],
  values: number[],
  planArgs: string[],
): { timesteps: number[]; total_cost: number; rho_curve?: [number, number][] } {
  const work = mkdtempSync(join(tmpdir(), "dnaplan-cli-"));
  try {
    const dnaPath = join(work, "dna.json");
    const outPath = join(work, "schedule.json");
    writeFileSync(dnaPath, JSON.stringify({ grid, values, meta: {} }));
    const proc = spawnSync(
      PYTHON,
      ["-m", "dnaplan", "plan", dnaPath, "-o", outPath, "--no-figures", ...planArgs],
      { encoding: "utf-8", env: { ...process.env, PYTHONPATH } },
    );
    if (proc.status !== 0) {
      throw new Error(`cli plan failed (${proc.status}): ${proc.stderr}`);
    }
    return JSON.parse(readFileSync(outPath, "utf-8"));
  } finally {
    rmSync(work, { recursive: true, force: true });
  }
}
