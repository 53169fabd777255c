/**
 * Node bindings for the dnaplan schedule planner.
 *
 * The planning core is the Python `dnaplan` package; its external interface
 * is a CLI exchanging JSON documents. This wrapper keeps that interface out
 * of sight: callers pass plain number arrays and get schedules back. Each
 * call round-trips through a private temp directory and a `dnaplan plan`
 * subprocess, so results are value-identical to command-line runs.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

export interface PlannerOptions {
  /** Python interpreter to run the core with. Default: $DNAPLAN_PYTHON or "python3". */
  python?: string;
  /** Directory containing the `dnaplan` package. Default: $DNAPLAN_PYTHONPATH or ../../src. */
  pythonPath?: string;
  /** Force plans to start at the largest grid point. Default true. */
  pinStart?: boolean;
  /** Force plans to stop at the smallest grid point. Default true. */
  pinEnd?: boolean;
}

export interface FixedPlan {
  timesteps: number[];
  totalCost: number;
}

export interface AdaptivePlan {
  timesteps: number[];
  totalCost: number;
  /** Pairs [n, rho(n)] up to the stopping step. */
  rhoCurve: [number, number][];
}

export interface StabilityDiagnosis {
  label:
    | "monotone-stable"
    | "late-oscillatory"
    | "initial-regressive"
    | "non-convergent";
  negativeGainRegions: [number, number][];
  suggestedStart: number;
  suggestedStop: number;
}

/** The requested plan admits no path (CLI exit 4). */
export class InfeasiblePlanError extends Error {}

/** The profile arrays violate an invariant (CLI exit 3). */
export class InvalidProfileError extends Error {}

const HERE = dirname(fileURLToPath(import.meta.url));

interface ScheduleDoc {
  timesteps: number[];
  total_cost: number;
  gain: number;
  steps: number;
  rho_curve?: [number, number][];
}

export class BoundPlanner {
  private readonly python: string;
  private readonly pythonPath: string;
  private readonly pinStart: boolean;
  private readonly pinEnd: boolean;

  constructor(options: PlannerOptions = {}) {
    this.python = options.python ?? process.env.DNAPLAN_PYTHON ?? "python3";
    this.pythonPath =
      options.pythonPath ??
      process.env.DNAPLAN_PYTHONPATH ??
      resolve(HERE, "../../src");
    this.pinStart = options.pinStart ?? true;
    this.pinEnd = options.pinEnd ?? true;
  }

  planFixed(grid: number[], values: number[], kSteps: number): FixedPlan {
    const doc = this.run(grid, values, ["--steps", String(kSteps)]);
    return { timesteps: doc.timesteps, totalCost: doc.total_cost };
  }

  planAdaptive(
    grid: number[],
    values: number[],
    rhoTh: number,
    kMax: number,
  ): AdaptivePlan {
    const doc = this.run(grid, values, [
      "--adaptive",
      "--rho",
      String(rhoTh),
      "--max-steps",
      String(kMax),
    ]);
    return {
      timesteps: doc.timesteps,
      totalCost: doc.total_cost,
      rhoCurve: doc.rho_curve ?? [],
    };
  }

  diagnose(grid: number[], values: number[]): StabilityDiagnosis {
    const doc = this.invoke(grid, values, (dnaPath, outPath) => [
      "diagnose",
      dnaPath,
      "-o",
      outPath,
      "--no-figures",
    ]) as {
      label: StabilityDiagnosis["label"];
      negative_gain_regions: [number, number][];
      suggested_start: number;
      suggested_stop: number;
    };
    return {
      label: doc.label,
      negativeGainRegions: doc.negative_gain_regions,
      suggestedStart: doc.suggested_start,
      suggestedStop: doc.suggested_stop,
    };
  }

  private run(grid: number[], values: number[], planArgs: string[]): ScheduleDoc {
    return this.invoke(grid, values, (dnaPath, outPath) => [
      "plan",
      dnaPath,
      "-o",
      outPath,
      "--no-figures",
      this.pinStart ? "--pin-start" : "--no-pin-start",
      this.pinEnd ? "--pin-end" : "--no-pin-end",
      ...planArgs,
    ]) as ScheduleDoc;
  }

  private invoke(
    grid: number[],
    values: number[],
    buildArgs: (dnaPath: string, outPath: string) => string[],
  ): unknown {
    const work = mkdtempSync(join(tmpdir(), "dnaplan-"));
    try {
      const dnaPath = join(work, "dna.json");
      const outPath = join(work, "out.json");
      writeFileSync(dnaPath, JSON.stringify({ grid, values, meta: {} }));
      const proc = spawnSync(
        this.python,
        ["-m", "dnaplan", ...buildArgs(dnaPath, outPath)],
        {
          encoding: "utf-8",
          env: { ...process.env, PYTHONPATH: this.pythonPath },
        },
      );
      if (proc.error) {
        throw proc.error;
      }
      if (proc.status === 3) {
        throw new InvalidProfileError(proc.stderr.trim());
      }
      if (proc.status === 4) {
        throw new InfeasiblePlanError(proc.stderr.trim());
      }
      if (proc.status !== 0) {
        throw new Error(
          `dnaplan exited with ${proc.status}: ${proc.stderr.trim()}`,
        );
      }
      return JSON.parse(readFileSync(outPath, "utf-8"));
    } finally {
      rmSync(work, { recursive: true, force: true });
    }
  }
}
