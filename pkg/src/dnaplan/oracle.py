"""Exhaustive reference planner for small grids.

Enumerates every admissible decreasing timestep sequence and recomputes all
costs from first principles. The arithmetic here is written separately from
the planner and profile modules on purpose: agreement between the two code
paths is the evidence the test suite leans on, so they must not share cost
code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .profile import DnaProfile

ENUMERATION_CAP = 16


@dataclass(frozen=True)
class OracleResult:
    best_sequence: tuple[float, ...]
    best_cost: float
    enumerated_count: int


def recompute_cost(dna: DnaProfile, timesteps: Sequence[float]) -> float:
    """Independent total-cost evaluation of an explicit schedule.

    Accumulates credit first, then jump costs in denoising order, then the
    stop risk; a different association order than the planner uses, which is
    what makes differential comparison meaningful.
    """
    ts = [float(x) for x in timesteps]
    if len(ts) < 2:
        raise ValueError("a schedule needs at least 2 timesteps")
    pts = list(dna.grid.points)
    idx = []
    for t in ts:
        if t not in pts:
            raise ValueError(f"timestep {t!r} is not on the grid")
        idx.append(pts.index(t))
    for a in range(1, len(ts)):
        if not ts[a] < ts[a - 1]:
            raise ValueError("timesteps must be strictly decreasing")
    vals = dna.values
    total = -vals[idx[0]]
    for a in range(len(ts) - 1):
        hi, lo = idx[a], idx[a + 1]
        t_hi, t_lo = pts[hi], pts[lo]
        total += ((t_hi - t_lo) / t_hi) ** 2 * vals[hi]
    total += vals[idx[-1]]
    return total


@dataclass(frozen=True)
class _Candidate:
    cost: float
    steps: int
    sequence: tuple[float, ...]

    def beats(self, other: Optional["_Candidate"]) -> bool:
        if other is None:
            return True
        if self.cost != other.cost:
            return self.cost < other.cost
        if self.steps != other.steps:
            return self.steps < other.steps
        return self.sequence > other.sequence


def enumerate_by_steps(
    dna: DnaProfile,
    pin_start: bool = True,
    pin_end: bool = True,
    max_steps: Optional[int] = None,
) -> tuple[dict[int, _Candidate], dict[int, int]]:
    """One exhaustive pass; best candidate and sequence count per step budget."""
    pts = list(dna.grid.points)
    vals = list(dna.values)
    n = len(pts)
    if n > ENUMERATION_CAP:
        raise ValueError(f"grid has {n} points; enumeration is capped at {ENUMERATION_CAP}")
    limit = (n - 1) if max_steps is None else min(max_steps, n - 1)
    if limit < 1:
        raise ValueError("no feasible step budget")

    best: dict[int, _Candidate] = {}
    counts: dict[int, int] = {}
    seq: list[float] = []

    def extend(i: int, cost_so_far: float) -> None:
        steps = len(seq) - 1
        if steps >= 1 and (i == 0 or not pin_end):
            cand = _Candidate(cost_so_far + vals[i], steps, tuple(seq))
            counts[steps] = counts.get(steps, 0) + 1
            if cand.beats(best.get(steps)):
                best[steps] = cand
        if steps >= limit:
            return
        for j in range(i - 1, -1, -1):
            w = ((pts[i] - pts[j]) / pts[i]) ** 2 * vals[i]
            seq.append(pts[j])
            extend(j, cost_so_far + w)
            seq.pop()

    starts = [n - 1] if pin_start else range(n - 1, -1, -1)
    for s in starts:
        seq.append(pts[s])
        extend(s, -vals[s])
        seq.pop()
    return best, counts


def enumerate_best(
    dna: DnaProfile,
    k_steps: Optional[int] = None,
    pin_start: bool = True,
    pin_end: bool = True,
) -> OracleResult:
    """Globally best sequence by brute force, for a fixed or open step budget."""
    n = len(dna.grid.points)
    if k_steps is not None and not 1 <= k_steps <= n - 1:
        raise ValueError(f"step budget {k_steps} infeasible on a {n}-point grid")
    best, counts = enumerate_by_steps(dna, pin_start=pin_start, pin_end=pin_end, max_steps=k_steps)
    if k_steps is not None:
        cand = best.get(k_steps)
        if cand is None:
            raise ValueError(f"no admissible {k_steps}-step sequence")
        return OracleResult(cand.sequence, cand.cost, counts.get(k_steps, 0))
    overall: Optional[_Candidate] = None
    for steps in sorted(best):
        if best[steps].beats(overall):
            overall = best[steps]
    if overall is None:
        raise ValueError("no admissible sequence")
    return OracleResult(overall.sequence, overall.cost, sum(counts.values()))
