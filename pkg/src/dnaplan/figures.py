"""Matplotlib renderings of the delimited report outputs.

Each CLI report path can drop a PNG next to its CSV/JSON. Rendering is
deterministic (Agg backend, fixed sizes, no timestamps) so figures satisfy
the same byte-identity guarantee as the data files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .diagnostics import GainSeries
from .linearflow import RolloutReport
from .profile import DnaProfile

_FIGSIZE = (6.4, 4.0)
_DPI = 120


def _finish(fig, ax, path: str | Path) -> None:
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=_DPI)
    plt.close(fig)


def save_profile_figure(dna: DnaProfile, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(dna.grid.points, dna.values, color="tab:blue", lw=1.5)
    ax.set_xlabel("t")
    ax.set_ylabel("squared reconstruction error")
    ax.set_title("difficulty profile")
    _finish(fig, ax, path)


def save_rho_curve_figure(
    rho_curve: Sequence[tuple[int, float]], threshold: float, path: str | Path
) -> None:
    steps = [n for n, _ in rho_curve]
    rhos = [r for _, r in rho_curve]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(steps, rhos, marker="o", color="tab:blue", lw=1.5)
    ax.axhline(threshold, color="tab:red", ls="--", lw=1.0, label=f"threshold {threshold:g}")
    ax.set_xlabel("steps")
    ax.set_ylabel("explained gain ratio")
    ax.set_title("adaptive stopping trace")
    ax.legend(loc="lower right")
    _finish(fig, ax, path)


def save_gain_figure(series: GainSeries, label: str, path: str | Path) -> None:
    mids = series.midpoints()
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(mids, series.gains, color="tab:blue", lw=1.2)
    ax.axhline(0.0, color="black", lw=0.8)
    neg_m = [m for m, g in zip(mids, series.gains) if g < 0.0]
    neg_g = [g for g in series.gains if g < 0.0]
    if neg_m:
        ax.scatter(neg_m, neg_g, color="tab:red", s=12, zorder=3, label="negative gain")
        ax.legend(loc="best")
    ax.set_xlabel("t (interval midpoint)")
    ax.set_ylabel("step-wise gain")
    ax.set_title(f"gain decomposition: {label}")
    _finish(fig, ax, path)


def save_rollout_figure(report: RolloutReport, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(report.timesteps, report.err_sq, marker="o", color="tab:blue", lw=1.2,
            label="|x - x0|^2")
    ax.plot(report.timesteps, report.drift_sq, marker="s", color="tab:orange", lw=1.2,
            label="per-step drift^2")
    ax.invert_xaxis()
    ax.set_xlabel("t (denoising direction)")
    ax.set_ylabel("squared error")
    mode = "anchored" if report.correction else "compounding"
    ax.set_title(f"rollout trace ({mode})")
    ax.legend(loc="best")
    _finish(fig, ax, path)
