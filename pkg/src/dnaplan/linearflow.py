"""Exactly solvable linear-flow world for end-to-end verification.

States interpolate linearly between a data point and a fixed noise draw,
and the synthetic denoiser errs by a known magnitude along one fixed unit
direction. That makes the drift of any first-order jump an exact algebraic
multiple of the source-time reconstruction error, so planner costs can be
checked against simulated trajectories to floating-point accuracy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .profile import DnaProfile, TimeGrid
from .serialize import csv_text, dumps

UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class SimScenario:
    """Linear-flow world: data point, noise draw, error table, error direction."""

    x0: np.ndarray
    z: np.ndarray
    direction: np.ndarray
    error_grid: TimeGrid
    error_values: tuple[float, ...]

    def __post_init__(self) -> None:
        for name in ("x0", "z", "direction"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(
            self, "error_values", tuple(float(v) for v in self.error_values)
        )
        if self.x0.shape != self.z.shape or self.x0.shape != self.direction.shape:
            raise ValueError("x0, z and direction must share one dimension")
        norm = float(np.linalg.norm(self.direction))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"direction must be unit length, got |u|={norm!r}")
        if len(self.error_values) != len(self.error_grid.points):
            raise ValueError("error table length does not match its grid")
        for i, v in enumerate(self.error_values):
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"error_values[{i}] must be finite and >= 0")

    def error_at(self, t: float) -> float:
        """Error magnitude at time t: exact at grid points, linear between."""
        t = float(t)
        pts = self.error_grid.points
        vals = self.error_values
        if t in pts:
            return vals[pts.index(t)]
        if t <= pts[0]:
            return vals[0]
        if t >= pts[-1]:
            return vals[-1]
        hi = next(i for i, p in enumerate(pts) if p > t)
        lo = hi - 1
        frac = (t - pts[lo]) / (pts[hi] - pts[lo])
        return vals[lo] + frac * (vals[hi] - vals[lo])


def make_scenario(
    x0: Sequence[float],
    z: Sequence[float],
    direction: Sequence[float],
    error_grid: TimeGrid,
    error_values: Sequence[float],
) -> SimScenario:
    return SimScenario(
        x0=np.asarray(x0, dtype=np.float64),
        z=np.asarray(z, dtype=np.float64),
        direction=np.asarray(direction, dtype=np.float64),
        error_grid=error_grid,
        error_values=tuple(error_values),
    )


def random_scenario(
    rng: np.random.Generator,
    d_sim: int = 8,
    n_points: int = 32,
    error_scale: float = 1.0,
) -> SimScenario:
    """Random world for identity sweeps: random endpoints, random error table."""
    from .profile import uniform_grid

    u = rng.normal(size=d_sim)
    u = u / np.linalg.norm(u)
    return SimScenario(
        x0=rng.normal(size=d_sim),
        z=rng.normal(size=d_sim),
        direction=u,
        error_grid=uniform_grid(n_points),
        error_values=tuple(error_scale * rng.random(n_points)),
    )


def ideal_state(s: SimScenario, t: float) -> np.ndarray:
    """On-trajectory state at time t: (1 - t) x0 + t z."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t!r}")
    return (1.0 - t) * s.x0 + t * s.z


def clean_estimate(s: SimScenario, t: float) -> np.ndarray:
    """The synthetic denoiser's reconstruction at time t: x0 + e(t) u."""
    return s.x0 + s.error_at(t) * s.direction


def model_velocity(s: SimScenario, t: float) -> np.ndarray:
    """Velocity implied by the reconstruction: (state - estimate) / t."""
    t = float(t)
    if not t > 0.0:
        raise ValueError("velocity is undefined at t = 0")
    if t > 1.0:
        raise ValueError(f"t must lie in (0, 1], got {t!r}")
    return (ideal_state(s, t) - clean_estimate(s, t)) / t


def propagate(s: SimScenario, t: float, k: float) -> np.ndarray:
    """One first-order jump from the on-trajectory state at t down to k."""
    t = float(t)
    k = float(k)
    if not 0.0 <= k <= t <= 1.0:
        raise ValueError(f"need 0 <= k <= t <= 1, got k={k!r}, t={t!r}")
    if k == t:
        return ideal_state(s, t)
    return ideal_state(s, t) - (t - k) * model_velocity(s, t)


def verify_lever_identity(s: SimScenario, t: float, k: float) -> float:
    """|  |x_k - x_k*|^2  -  lever(t,k) * e(t)^2  |, exactly 0 in real arithmetic."""
    drift = propagate(s, t, k) - ideal_state(s, k)
    drift_sq = float(drift @ drift)
    e = s.error_at(t)
    lever = ((t - k) / t) ** 2
    return abs(drift_sq - lever * (e * e))


def extract_dna(s: SimScenario, grid: TimeGrid) -> DnaProfile:
    """Measure the profile: squared reconstruction error at every grid point."""
    values = []
    for t in grid.points:
        resid = clean_estimate(s, t) - s.x0
        values.append(float(resid @ resid))
    return DnaProfile(
        grid=grid,
        values=tuple(values),
        meta={"source": "linear-flow-sim", "dim": int(s.x0.shape[0])},
    )


def extract_dna_mc(
    s: SimScenario,
    grid: TimeGrid,
    n_draws: int,
    rng: np.random.Generator,
) -> DnaProfile:
    """Expectation-form measurement: average squared error over fresh draws.

    Redraws the endpoint pair for every sample while keeping the error table
    and direction fixed. Under this scenario family the per-draw error is
    independent of the draw, so the average matches the single-reference
    measurement; the mode exists to make the expectation semantics explicit
    rather than to change any number.
    """
    if n_draws < 1:
        raise ValueError("need at least one draw")
    d = int(s.x0.shape[0])
    acc = np.zeros(len(grid.points))
    for _ in range(n_draws):
        draw = SimScenario(
            x0=rng.normal(size=d),
            z=rng.normal(size=d),
            direction=s.direction,
            error_grid=s.error_grid,
            error_values=s.error_values,
        )
        for i, t in enumerate(grid.points):
            resid = clean_estimate(draw, t) - draw.x0
            acc[i] += float(resid @ resid)
    return DnaProfile(
        grid=grid,
        values=tuple(acc / n_draws),
        meta={"source": "linear-flow-sim-mc", "dim": d, "draws": int(n_draws)},
    )


@dataclass(frozen=True)
class RolloutReport:
    """Trace of executing a schedule in the linear-flow world."""

    timesteps: tuple[float, ...]
    correction: bool
    states: tuple[np.ndarray, ...]
    drift_sq: tuple[float, ...]  # per arrival, |x - x*|^2; index 0 is the start
    err_sq: tuple[float, ...]  # per state, |x - x0|^2
    final_err_sq: float
    total_drift_sq: float


def rollout(
    s: SimScenario, timesteps: Sequence[float], correction: bool = True
) -> RolloutReport:
    """Execute first-order jumps along a schedule.

    With ``correction`` on, each jump restarts from the on-trajectory state,
    so per-step drifts match the planner's per-jump costs; with it off, the
    realized state compounds and the report records the divergence.
    """
    ts = [float(x) for x in timesteps]
    if len(ts) < 2:
        raise ValueError("a schedule needs at least 2 timesteps")
    for a in range(1, len(ts)):
        if not ts[a] < ts[a - 1]:
            raise ValueError("timesteps must be strictly decreasing")
    if ts[0] > 1.0 or ts[-1] < 0.0:
        raise ValueError("timesteps must lie within [0, 1]")

    states = [ideal_state(s, ts[0])]
    drift = [0.0]
    err = [float(np.sum((states[0] - s.x0) ** 2))]
    x = states[0]
    for a in range(len(ts) - 1):
        t_hi, t_lo = ts[a], ts[a + 1]
        if correction:
            x_next = propagate(s, t_hi, t_lo)
        else:
            v = (x - clean_estimate(s, t_hi)) / t_hi
            x_next = x - (t_hi - t_lo) * v
        ideal = ideal_state(s, t_lo)
        states.append(x_next)
        drift.append(float(np.sum((x_next - ideal) ** 2)))
        err.append(float(np.sum((x_next - s.x0) ** 2)))
        x = ideal if correction else x_next
    return RolloutReport(
        timesteps=tuple(ts),
        correction=correction,
        states=tuple(states),
        drift_sq=tuple(drift),
        err_sq=tuple(err),
        final_err_sq=err[-1],
        total_drift_sq=float(sum(drift)),
    )


def rollout_csv_text(report: RolloutReport) -> str:
    rows = [
        (step, t, d, e)
        for step, (t, d, e) in enumerate(
            zip(report.timesteps, report.drift_sq, report.err_sq)
        )
    ]
    return csv_text(("step", "t", "drift_sq", "err_sq"), rows)


def scenario_to_json_dict(s: SimScenario) -> dict:
    return {
        "x0": list(s.x0),
        "z": list(s.z),
        "u": list(s.direction),
        "e": {"grid": list(s.error_grid.points), "values": list(s.error_values)},
    }


def scenario_from_json_dict(doc: dict) -> SimScenario:
    table = doc["e"]
    return make_scenario(
        x0=doc["x0"],
        z=doc["z"],
        direction=doc["u"],
        error_grid=TimeGrid(tuple(float(t) for t in table["grid"])),
        error_values=tuple(float(v) for v in table["values"]),
    )


def load_scenario(path: str | Path) -> SimScenario:
    return scenario_from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_scenario(s: SimScenario, path: str | Path) -> None:
    Path(path).write_text(dumps(scenario_to_json_dict(s)), encoding="utf-8")
