"""Minimum-cost schedule search over a profile's jump graph.

Nodes are grid points ordered by time. A virtual source charges the
residual error of the point where denoising stops, a virtual sink credits
the error of the point where it starts, and each transition edge charges
the lever-scaled drift of one solver jump. The credits make edge weights
negative, so every search here runs as a layered dynamic program over the
time-sorted nodes; nonnegative-weight shortest-path algorithms do not
apply.

Emitted schedules list timesteps in denoising order (largest first). Ties
are broken toward fewer steps, then toward the lexicographically largest
timestep sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .profile import DnaProfile, ProfileValidationError, transition_cost


class InfeasiblePlanError(Exception):
    """The requested plan admits no path."""


@dataclass(frozen=True)
class PlannerGraph:
    """Jump graph over a subset of a profile's grid points.

    ``nodes`` holds grid indices in ascending time order. ``source_weights``
    and ``credit_weights`` are aligned with ``nodes`` and sum to zero
    pointwise: stopping and immediately starting at the same point is free.
    ``pin_start`` restricts the start credit to the largest node,
    ``pin_end`` restricts the stop risk to the smallest one.
    """

    dna: DnaProfile
    nodes: tuple[int, ...]
    pin_start: bool
    pin_end: bool
    source_weights: tuple[float, ...]
    credit_weights: tuple[float, ...]

    def node_times(self) -> tuple[float, ...]:
        return tuple(self.dna.grid.points[i] for i in self.nodes)

    def transition_weight(self, low_index: int, high_index: int) -> float:
        """Weight of the graph edge low -> high (the jump high -> low)."""
        return transition_cost(self.dna, high_index, low_index)


@dataclass(frozen=True)
class Schedule:
    """A planned denoising schedule: strictly decreasing grid timesteps."""

    timesteps: tuple[float, ...]
    total_cost: float
    gain: float
    steps: int
    source: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AdaptivePlanResult:
    """Adaptive-length planning outcome with its explained-gain trace."""

    schedule: Schedule
    rho_curve: tuple[tuple[int, float], ...]
    w_max: float
    w_min: float
    threshold: float


def build_graph(dna: DnaProfile, pin_start: bool = True, pin_end: bool = True) -> PlannerGraph:
    """Build the full jump graph over every grid point of a valid profile."""
    report = dna.validate()
    if report:
        raise ProfileValidationError(report)
    nodes = tuple(range(len(dna.grid.points)))
    src = tuple(dna.values)
    credit = tuple(-v for v in dna.values)
    return PlannerGraph(
        dna=dna,
        nodes=nodes,
        pin_start=pin_start,
        pin_end=pin_end,
        source_weights=src,
        credit_weights=credit,
    )


def restrict_nodes(graph: PlannerGraph, allowed: Iterable[int]) -> PlannerGraph:
    """Keep only the given grid indices; weights on retained nodes are unchanged."""
    keep = sorted(set(int(i) for i in allowed) & set(graph.nodes))
    if len(keep) < 2:
        raise InfeasiblePlanError("node restriction must keep at least 2 nodes")
    src = tuple(graph.dna.values[i] for i in keep)
    credit = tuple(-graph.dna.values[i] for i in keep)
    return PlannerGraph(
        dna=graph.dna,
        nodes=tuple(keep),
        pin_start=graph.pin_start,
        pin_end=graph.pin_end,
        source_weights=src,
        credit_weights=credit,
    )


def path_cost(graph: PlannerGraph, timesteps: Sequence[float]) -> float:
    """Total cost of an explicit schedule: stop risk + jumps - start credit.

    Accumulates from the stop side upward, which is the same operation
    order as the planning recursion, so planner outputs reproduce their
    reported cost exactly.
    """
    ts = [float(x) for x in timesteps]
    if len(ts) < 2:
        raise ValueError("a schedule needs at least 2 timesteps")
    for a in range(1, len(ts)):
        if not ts[a] < ts[a - 1]:
            raise ValueError("timesteps must be strictly decreasing")
    idx = [graph.dna.grid.index_of(t) for t in ts]
    pts = graph.dna.grid.points
    vals = graph.dna.values
    acc = vals[idx[-1]]
    for a in range(len(idx) - 1, 0, -1):
        hi, lo = idx[a - 1], idx[a]
        r = (pts[hi] - pts[lo]) / pts[hi]
        acc = acc + r * r * vals[hi]
    return acc - vals[idx[0]]


def _node_arrays(graph: PlannerGraph) -> tuple[np.ndarray, np.ndarray]:
    t = np.array([graph.dna.grid.points[i] for i in graph.nodes], dtype=np.float64)
    c = np.array([graph.dna.values[i] for i in graph.nodes], dtype=np.float64)
    return t, c


def _weight_matrix(t: np.ndarray, c: np.ndarray) -> np.ndarray:
    # w[j, i] = lever(t_i, t_j) * c_i for j < i, +inf elsewhere. Written as
    # r*r to match the scalar lever bit for bit.
    m = len(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (t[None, :] - t[:, None]) / t[None, :]
        w = (r * r) * c[None, :]
    valid = np.triu(np.ones((m, m), dtype=bool), k=1)
    w[~valid] = np.inf
    return w


def _masks(graph: PlannerGraph) -> tuple[np.ndarray, np.ndarray]:
    m = len(graph.nodes)
    stop_ok = np.zeros(m, dtype=bool)
    start_ok = np.zeros(m, dtype=bool)
    if graph.pin_end:
        stop_ok[0] = True
    else:
        stop_ok[:] = True
    if graph.pin_start:
        start_ok[m - 1] = True
    else:
        start_ok[:] = True
    return stop_ok, start_ok


def _dp_layers(graph: PlannerGraph, max_steps: int):
    """dp[n][i]: best cost of reaching node i from the stop side in n jumps."""
    t, c = _node_arrays(graph)
    m = len(t)
    w = _weight_matrix(t, c)
    stop_ok, start_ok = _masks(graph)
    dp = np.full((max_steps + 1, m), np.inf)
    dp[0][stop_ok] = c[stop_ok]
    for n in range(1, max_steps + 1):
        dp[n] = np.min(dp[n - 1][:, None] + w, axis=0)
    return dp, w, t, c, start_ok


def _layer_totals(dp_row: np.ndarray, c: np.ndarray, start_ok: np.ndarray) -> np.ndarray:
    totals = dp_row + (-c)
    totals = np.where(start_ok, totals, np.inf)
    return totals


def _pick_start(totals: np.ndarray) -> tuple[float, int]:
    best = float(np.min(totals))
    if not np.isfinite(best):
        raise InfeasiblePlanError("no admissible path under the given constraints")
    candidates = np.nonzero(totals == best)[0]
    return best, int(candidates[-1])


def _reconstruct(dp: np.ndarray, w: np.ndarray, n_steps: int, start_pos: int) -> list[int]:
    # Walk predecessors from the start node downward, preferring the largest
    # achieving node at every step; this yields the lexicographically
    # largest optimal sequence in denoising order.
    seq = [start_pos]
    i = start_pos
    for n in range(n_steps, 0, -1):
        cand = dp[n - 1] + w[:, i]
        achieves = np.nonzero(cand == dp[n][i])[0]
        i = int(achieves[-1])
        seq.append(i)
    return seq


def _schedule_from_positions(graph: PlannerGraph, positions: list[int]) -> Schedule:
    times = tuple(graph.dna.grid.points[graph.nodes[p]] for p in positions)
    cost = path_cost(graph, times)
    return Schedule(
        timesteps=times,
        total_cost=cost,
        gain=-cost,
        steps=len(times) - 1,
        source=dict(graph.dna.meta),
    )


def plan_fixed(graph: PlannerGraph, k_steps: int) -> Schedule:
    """Minimum-cost plan with exactly ``k_steps`` transition jumps."""
    m = len(graph.nodes)
    if k_steps < 1 or k_steps > m - 1:
        raise InfeasiblePlanError(
            f"step budget {k_steps} infeasible on {m} admissible nodes"
        )
    dp, w, _, c, start_ok = _dp_layers(graph, k_steps)
    totals = _layer_totals(dp[k_steps], c, start_ok)
    _, start_pos = _pick_start(totals)
    positions = _reconstruct(dp, w, k_steps, start_pos)
    return _schedule_from_positions(graph, positions)


def plan_unconstrained(graph: PlannerGraph) -> Schedule:
    """Minimum-cost plan over all lengths >= 1 jump.

    The zero-jump path (stop where you start) always costs exactly zero and
    performs no denoising; it is excluded.
    """
    m = len(graph.nodes)
    if m < 2:
        raise InfeasiblePlanError("need at least 2 admissible nodes")
    dp, w, _, c, start_ok = _dp_layers(graph, m - 1)
    best_cost = np.inf
    best_n = None
    for n in range(1, m):
        totals = _layer_totals(dp[n], c, start_ok)
        cost = float(np.min(totals))
        if cost < best_cost:
            best_cost = cost
            best_n = n
    if best_n is None or not np.isfinite(best_cost):
        raise InfeasiblePlanError("no admissible path under the given constraints")
    totals = _layer_totals(dp[best_n], c, start_ok)
    _, start_pos = _pick_start(totals)
    positions = _reconstruct(dp, w, best_n, start_pos)
    return _schedule_from_positions(graph, positions)


def plan_adaptive(
    graph: PlannerGraph,
    rho_th: float,
    k_max: int,
    partial_mode: str = "replan",
) -> AdaptivePlanResult:
    """Shortest plan whose explained gain ratio reaches ``rho_th``.

    W_n is the best n-jump total cost; rho(n) = (W_1 - W_n) / (W_1 - W_kmax)
    so rho(1) = 0 and rho(k_max) = 1. Planning stops at the first n with
    rho(n) >= rho_th. ``partial_mode`` selects how W_n is read: "replan"
    (default) re-solves the n-jump problem from scratch; "prefix" prices the
    first n jumps of the single k_max-step plan instead.
    """
    if not 0.0 < rho_th <= 1.0:
        raise ValueError(f"rho_th must lie in (0, 1], got {rho_th!r}")
    m = len(graph.nodes)
    if k_max < 1 or k_max > m - 1:
        raise InfeasiblePlanError(f"k_max {k_max} infeasible on {m} admissible nodes")
    if partial_mode not in ("replan", "prefix"):
        raise ValueError(f"unknown partial_mode {partial_mode!r}")

    dp = w = start_ok = None
    if partial_mode == "replan":
        dp, w, _, c, start_ok = _dp_layers(graph, k_max)
        costs = [float(np.min(_layer_totals(dp[n], c, start_ok)))
                 for n in range(1, k_max + 1)]
        if not all(np.isfinite(costs)):
            raise InfeasiblePlanError("no admissible path under the given constraints")
    else:
        full = plan_fixed(graph, k_max)
        costs = [path_cost(graph, full.timesteps[: n + 1]) for n in range(1, k_max + 1)]

    w_max = costs[0]
    w_min = costs[-1]

    def make_schedule(n: int) -> Schedule:
        if partial_mode == "replan":
            totals = _layer_totals(dp[n], c, start_ok)
            _, start_pos = _pick_start(totals)
            return _schedule_from_positions(graph, _reconstruct(dp, w, n, start_pos))
        return _schedule_from_positions(
            graph, [graph.nodes.index(graph.dna.grid.index_of(t)) for t in full.timesteps[: n + 1]]
        )

    if w_max == w_min:
        return AdaptivePlanResult(
            schedule=make_schedule(1),
            rho_curve=((1, 1.0),),
            w_max=w_max,
            w_min=w_min,
            threshold=rho_th,
        )

    curve: list[tuple[int, float]] = []
    n_stop = k_max
    for n in range(1, k_max + 1):
        rho = (w_max - costs[n - 1]) / (w_max - w_min)
        curve.append((n, rho))
        if rho >= rho_th:
            n_stop = n
            break
    return AdaptivePlanResult(
        schedule=make_schedule(n_stop),
        rho_curve=tuple(curve),
        w_max=w_max,
        w_min=w_min,
        threshold=rho_th,
    )


def schedule_to_json_dict(
    schedule: Schedule,
    rho_curve: Sequence[tuple[int, float]] | None = None,
) -> dict:
    doc: dict = {
        "timesteps": list(schedule.timesteps),
        "total_cost": schedule.total_cost,
        "gain": schedule.gain,
        "steps": schedule.steps,
    }
    if rho_curve is not None:
        doc["rho_curve"] = [[int(n), float(r)] for n, r in rho_curve]
    doc["source"] = dict(schedule.source)
    return doc


def schedule_from_json_dict(doc: dict) -> Schedule:
    return Schedule(
        timesteps=tuple(float(t) for t in doc["timesteps"]),
        total_cost=float(doc["total_cost"]),
        gain=float(doc["gain"]),
        steps=int(doc["steps"]),
        source=dict(doc.get("source", {})),
    )
