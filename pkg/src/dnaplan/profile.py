"""Difficulty profiles over a normalized time grid, and the jump-cost primitives.

A profile ("DNA") pairs a strictly increasing time grid in [0, 1] with one
nonnegative squared-error magnitude per grid point. The cost of jumping a
first-order solver from time t down to time k is the source point's error
scaled by the lever ((t - k) / t)^2; every planning weight in this package
is assembled from that product.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .serialize import csv_text, dumps, format_float


class ProfileValidationError(ValueError):
    """Profile or grid violates a structural invariant."""

    def __init__(self, violations: Sequence[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing timestep values in normalized [0, 1] time."""

    points: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(float(p) for p in self.points))

    def __len__(self) -> int:
        return len(self.points)

    def validate(self) -> list[str]:
        out: list[str] = []
        pts = self.points
        if len(pts) < 2:
            out.append(f"grid needs at least 2 points, got {len(pts)}")
        for i, p in enumerate(pts):
            if not math.isfinite(p):
                out.append(f"grid[{i}] is not finite")
            elif not 0.0 <= p <= 1.0:
                out.append(f"grid[{i}]={format_float(p)} outside [0, 1]")
        for i in range(1, len(pts)):
            if not pts[i] > pts[i - 1]:
                out.append(f"grid not strictly increasing at index {i}")
        if pts and math.isfinite(pts[-1]) and not pts[-1] > 0.0:
            out.append("largest grid point must be strictly positive")
        return out

    def index_of(self, t: float) -> int:
        """Exact-match grid index of a timestep; raises if off-grid."""
        t = float(t)
        try:
            return self.points.index(t)
        except ValueError:
            raise ValueError(f"timestep {format_float(t)} is not on the grid") from None


def uniform_grid(n_points: int, t_min: float = 0.0, t_max: float = 1.0) -> TimeGrid:
    """Evenly spaced grid with both endpoints included."""
    if n_points < 2:
        raise ValueError("a grid needs at least 2 points")
    step = (t_max - t_min) / (n_points - 1)
    pts = [t_min + i * step for i in range(n_points - 1)]
    pts.append(t_max)
    return TimeGrid(tuple(pts))


@dataclass(frozen=True)
class DnaProfile:
    """A time grid plus one nonnegative error magnitude per grid point.

    ``meta`` is a free-form source descriptor (model name, extraction
    settings) carried through planning into output provenance.
    """

    grid: TimeGrid
    values: tuple[float, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def validate(self) -> list[str]:
        out = self.grid.validate()
        if len(self.values) != len(self.grid.points):
            out.append(
                f"length mismatch: {len(self.grid.points)} grid points "
                f"vs {len(self.values)} values"
            )
        for i, v in enumerate(self.values):
            if not math.isfinite(v):
                out.append(f"values[{i}] is not finite")
            elif v < 0.0:
                out.append(f"values[{i}]={format_float(v)} is negative")
        return out

    def check(self) -> "DnaProfile":
        """Raise ProfileValidationError unless the profile is valid."""
        report = self.validate()
        if report:
            raise ProfileValidationError(report)
        return self


def temporal_lever(t: float, k: float) -> float:
    """Squared fractional jump length ((t - k) / t)^2 for a jump t -> k.

    Dimensionless, in [0, 1]; 0 iff k == t, 1 iff k == 0. Invariant under
    uniform rescaling of both times, which is why time normalization never
    changes any planning cost.
    """
    t = float(t)
    k = float(k)
    if not t > 0.0:
        raise ValueError(f"jump source must have t > 0, got t={t!r}")
    if k < 0.0 or k > t:
        raise ValueError(f"jump destination must satisfy 0 <= k <= t, got k={k!r}, t={t!r}")
    r = (t - k) / t
    return r * r


def transition_cost(dna: DnaProfile, src_index: int, dst_index: int) -> float:
    """Drift cost of jumping from grid point ``src_index`` down to ``dst_index``.

    Depends on the destination only through the jump length; the error
    magnitude entering the product is the source point's alone.
    """
    pts = dna.grid.points
    n = len(pts)
    if not 0 <= src_index < n:
        raise IndexError(f"src_index {src_index} out of range for {n}-point grid")
    if not 0 <= dst_index < n:
        raise IndexError(f"dst_index {dst_index} out of range for {n}-point grid")
    t, k = pts[src_index], pts[dst_index]
    if not t > k:
        raise ValueError(
            f"source timestep must exceed destination, got t={t!r} <= k={k!r}"
        )
    return temporal_lever(t, k) * dna.values[src_index]


def stride_indices(n_points: int, stride: int) -> list[int]:
    """Grid indices kept by stride subsampling.

    Every stride-th index starting at 0; the final selected index is snapped
    to the last grid point so the canonical start stays on the subsampled
    grid (a 100-point grid at stride 2 keeps 50 points, ending at index 99).
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if n_points < 1:
        raise ValueError("empty grid")
    idx = list(range(0, n_points, stride))
    if idx[-1] != n_points - 1:
        idx[-1] = n_points - 1
    return idx


def resample(dna: DnaProfile, stride: int) -> DnaProfile:
    """Subsample a profile by stride, keeping (grid, value) pairs bit-identical."""
    idx = stride_indices(len(dna.grid.points), stride)
    if len(idx) < 2:
        raise ValueError(
            f"stride {stride} leaves fewer than 2 of {len(dna.grid.points)} points"
        )
    grid = TimeGrid(tuple(dna.grid.points[i] for i in idx))
    values = tuple(dna.values[i] for i in idx)
    return DnaProfile(grid=grid, values=values, meta=dict(dna.meta))


def _normalize_times(points: Sequence[float]) -> list[float]:
    # Inputs given on [0, T] with T > 1 are rescaled onto [0, 1]; the lever is
    # invariant under this, so no cost changes.
    pts = [float(p) for p in points]
    if pts and all(math.isfinite(p) for p in pts):
        top = max(pts)
        if top > 1.0:
            pts = [p / top for p in pts]
    return pts


def profile_to_json_dict(dna: DnaProfile) -> dict:
    return {
        "grid": list(dna.grid.points),
        "values": list(dna.values),
        "meta": dict(dna.meta),
    }


def profile_from_json_dict(doc: dict) -> DnaProfile:
    if not isinstance(doc, dict) or "grid" not in doc or "values" not in doc:
        raise ProfileValidationError(["document must contain 'grid' and 'values' arrays"])
    grid = TimeGrid(tuple(_normalize_times(doc["grid"])))
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise ProfileValidationError(["'meta' must be an object"])
    return DnaProfile(grid=grid, values=tuple(float(v) for v in doc["values"]), meta=meta).check()


def profile_to_csv_text(dna: DnaProfile) -> str:
    return csv_text(("t", "c"), zip(dna.grid.points, dna.values))


def profile_from_csv_text(text: str) -> DnaProfile:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "t,c":
        raise ProfileValidationError(["CSV profile must start with a 't,c' header row"])
    ts: list[float] = []
    cs: list[float] = []
    for i, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 2:
            raise ProfileValidationError([f"CSV line {i}: expected two columns"])
        try:
            ts.append(float(parts[0]))
            cs.append(float(parts[1]))
        except ValueError:
            raise ProfileValidationError([f"CSV line {i}: non-numeric cell"]) from None
    grid = TimeGrid(tuple(_normalize_times(ts)))
    return DnaProfile(grid=grid, values=tuple(cs), meta={}).check()


def load_profile(path: str | Path) -> DnaProfile:
    """Read a profile from a JSON document or a t,c CSV file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        return profile_from_csv_text(text)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileValidationError([f"not valid JSON: {exc}"]) from None
    return profile_from_json_dict(doc)


def save_profile(dna: DnaProfile, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        path.write_text(profile_to_csv_text(dna), encoding="utf-8")
    else:
        path.write_text(dumps(profile_to_json_dict(dna)), encoding="utf-8")
