import { describe, expect, it } from "vitest";

import { BoundPlanner } from "../src/index.js";
import { cliPlan, decayingProfile, randomProfile } from "./helpers.js";

// Fifty seeded profiles; the wrapper must return exactly the sequences the
// CLI writes, with costs agreeing to 1e-12.
describe("wrapper/CLI parity", () => {
  it("planFixed matches direct CLI runs on a 50-profile corpus", () => {
    const planner = new BoundPlanner();
    for (let seed = 0; seed < 50; seed++) {
      const { grid, values } = randomProfile(1000 + seed, 13);
      const k = 1 + (seed % 6);
      const viaWrapper = planner.planFixed(grid, values, k);
      const viaCli = cliPlan(grid, values, ["--steps", String(k)]);
      expect(viaWrapper.timesteps).toEqual(viaCli.timesteps);
      expect(Math.abs(viaWrapper.totalCost - viaCli.total_cost)).toBeLessThanOrEqual(
        1e-12,
      );
    }
  }, 120_000);

  it("planAdaptive matches direct CLI runs", () => {
    const planner = new BoundPlanner();
    for (const rate of [2.5, 4.0, 6.0]) {
      const { grid, values } = decayingProfile(60, rate);
      const viaWrapper = planner.planAdaptive(grid, values, 0.99, 20);
      const viaCli = cliPlan(grid, values, [
        "--adaptive",
        "--rho",
        "0.99",
        "--max-steps",
        "20",
      ]);
      expect(viaWrapper.timesteps).toEqual(viaCli.timesteps);
      expect(viaWrapper.rhoCurve).toEqual(viaCli.rho_curve);
    }
  }, 60_000);

  it("pin flags mirror the CLI flags", () => {
    const planner = new BoundPlanner({ pinStart: false, pinEnd: false });
    const { grid, values } = randomProfile(7, 11);
    const viaWrapper = planner.planFixed(grid, values, 3);
    const viaCli = cliPlan(grid, values, [
      "--steps",
      "3",
      "--no-pin-start",
      "--no-pin-end",
    ]);
    expect(viaWrapper.timesteps).toEqual(viaCli.timesteps);
    expect(viaWrapper.totalCost).toBe(viaCli.total_cost);
  }, 30_000);
});
