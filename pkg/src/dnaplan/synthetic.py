"""Synthetic profile families and regression data for tests and demos.

These generators stand in for profiles measured from real models: smooth
decaying error curves, the three diagnostic archetypes, and a seeded
embedding-to-profile regression task whose map is smooth but nonlinear.
"""

from __future__ import annotations

import math

import numpy as np

from .profile import DnaProfile, TimeGrid, uniform_grid


def exponential_decay_profile(
    n_points: int = 100, rate: float = 3.0, amplitude: float = 1.0
) -> DnaProfile:
    """Error shrinking exponentially toward t = 0, normalized to amplitude at t = 1."""
    grid = uniform_grid(n_points)
    denom = math.exp(rate) - 1.0
    values = tuple(amplitude * (math.exp(rate * t) - 1.0) / denom for t in grid.points)
    return DnaProfile(grid=grid, values=values, meta={"family": "exp-decay", "rate": rate})


def random_profile(n_points: int, seed: int, low: float = 0.0, high: float = 1.0) -> DnaProfile:
    """I.i.d. uniform values on a uniform grid; planner/oracle stress input."""
    rng = np.random.default_rng(seed)
    grid = uniform_grid(n_points)
    values = tuple(float(v) for v in rng.uniform(low, high, size=n_points))
    return DnaProfile(grid=grid, values=values, meta={"family": "uniform-random", "seed": seed})


def decaying_profile_suite(count: int, seed: int = 0, n_points: int = 100) -> list[DnaProfile]:
    """Randomized smooth decaying profiles (exponential plus power-law mix)."""
    rng = np.random.default_rng(seed)
    grid = uniform_grid(n_points)
    out = []
    for i in range(count):
        rate = float(rng.uniform(1.5, 6.0))
        power = float(rng.uniform(0.8, 3.0))
        mix = float(rng.uniform(0.0, 1.0))
        amp = float(rng.uniform(0.5, 2.0))
        denom = math.exp(rate) - 1.0
        values = tuple(
            amp * (mix * (math.exp(rate * t) - 1.0) / denom + (1.0 - mix) * t**power)
            for t in grid.points
        )
        out.append(
            DnaProfile(grid=grid, values=values, meta={"family": "decay-suite", "index": i})
        )
    return out


def archetype_monotone(n_points: int = 100) -> DnaProfile:
    """Strictly decaying error with gains that fade toward t = 0."""
    return exponential_decay_profile(n_points=n_points, rate=3.0)


def archetype_initial_dip(n_points: int = 100) -> DnaProfile:
    """Decaying shape whose value at the largest t drops below its neighbor.

    The final interval then has strongly negative gain, the signature of a
    misaligned pure-noise boundary.
    """
    base = exponential_decay_profile(n_points=n_points, rate=3.0)
    values = list(base.values)
    values[-1] = 0.7 * values[-2]
    return DnaProfile(grid=base.grid, values=tuple(values), meta={"family": "initial-dip"})


def archetype_flat_gain(n_points: int = 100) -> DnaProfile:
    """Constant positive gain everywhere: error never stops improving.

    Late-window mean gain equals the early-window mean, so the decay test
    fails at any ratio threshold below one.
    """
    grid = uniform_grid(n_points)
    values = tuple(t for t in grid.points)
    return DnaProfile(grid=grid, values=values, meta={"family": "flat-gain"})


def synthetic_regression_task(
    n_pairs: int = 2000,
    d_in: int = 16,
    n_points: int = 100,
    seed: int = 7,
) -> tuple[np.ndarray, np.ndarray, TimeGrid]:
    """Seeded smooth nonlinear map from embeddings to decaying profiles.

    Each embedding drives the decay rate, amplitude and one local bump of
    its profile through fixed random projections, so the map is learnable
    but far from linear. Returns (embeddings, profile matrix, grid).
    """
    rng = np.random.default_rng(seed)
    grid = uniform_grid(n_points)
    t = np.asarray(grid.points)

    proj = rng.normal(size=(5, d_in)) / math.sqrt(d_in)
    emb = rng.normal(size=(n_pairs, d_in))
    feats = emb @ proj.T  # (n_pairs, 5)

    def sigmoid(x: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-x))

    rate = 1.5 + 4.5 * sigmoid(feats[:, 0])
    amp = np.exp(0.6 * np.tanh(feats[:, 1]))
    bump_pos = 0.2 + 0.6 * sigmoid(feats[:, 2])
    bump_width = 0.05 + 0.12 * sigmoid(feats[:, 3])
    bump_amp = 0.6 * sigmoid(feats[:, 4])

    base = (np.exp(rate[:, None] * t[None, :]) - 1.0) / (np.exp(rate) - 1.0)[:, None]
    bumps = bump_amp[:, None] * np.exp(
        -((t[None, :] - bump_pos[:, None]) ** 2) / (2.0 * bump_width[:, None] ** 2)
    )
    profiles = amp[:, None] * (base + bumps)
    return emb, profiles, grid
