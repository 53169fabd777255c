"""Stability diagnostics of a difficulty profile.

Decomposes a profile into step-wise gains (first differences along
decreasing time, positive when error shrinks toward t = 0) and classifies
the shape into one of four regimes. Thresholds are ratio- or sign-based so
classification is invariant under uniform positive scaling; the one
magnitude threshold is applied after dividing by the largest absolute gain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from .profile import DnaProfile, TimeGrid
from .serialize import csv_text

LABELS = ("monotone-stable", "late-oscillatory", "initial-regressive", "non-convergent")


@dataclass(frozen=True)
class GainSeries:
    """Per-interval error reduction along decreasing time.

    ``gains[m]`` belongs to the interval [t_m, t_{m+1}] and equals
    C(t_{m+1}) - C(t_m); the list is indexed by ascending grid position.
    """

    grid: TimeGrid
    gains: tuple[float, ...]

    def midpoints(self) -> tuple[float, ...]:
        pts = self.grid.points
        return tuple((pts[m] + pts[m + 1]) / 2.0 for m in range(len(pts) - 1))


@dataclass(frozen=True)
class ClassifierConfig:
    """Thresholds for regime classification; all exposed, none normative."""

    tau_neg: float = 0.01  # applied to gains divided by max |gain|
    t_late: float = 0.4  # late-stage window is t < t_late
    n_osc: int = 3  # sign changes in the late window
    kappa: float = 0.5  # late/early mean-gain ratio for non-convergence
    mono_tol: float = 0.02  # slack for the decaying-gain check, normalized


@dataclass(frozen=True)
class StabilityReport:
    label: str
    negative_gain_regions: tuple[tuple[float, float], ...]
    suggested_start: float
    suggested_stop: float
    details: dict = field(default_factory=dict)


def stepwise_gain(dna: DnaProfile) -> GainSeries:
    """Exact first differences of the profile along decreasing time."""
    report = dna.validate()
    if report:
        from .profile import ProfileValidationError

        raise ProfileValidationError(report)
    pts = dna.grid.points
    vals = dna.values
    gains = tuple(vals[m + 1] - vals[m] for m in range(len(pts) - 1))
    return GainSeries(grid=dna.grid, gains=gains)


def _negative_regions(series: GainSeries) -> tuple[tuple[float, float], ...]:
    pts = series.grid.points
    regions: list[tuple[float, float]] = []
    run_start: int | None = None
    for m, g in enumerate(series.gains):
        if g < 0.0 and run_start is None:
            run_start = m
        elif g >= 0.0 and run_start is not None:
            regions.append((pts[run_start], pts[m]))
            run_start = None
    if run_start is not None:
        regions.append((pts[run_start], pts[-1]))
    return tuple(regions)


def classify(series: GainSeries, cfg: ClassifierConfig = ClassifierConfig()) -> StabilityReport:
    """Assign a stability regime and start/stop truncation hints.

    Checked in priority order: initial-regressive (strongly negative gain at
    the largest timestep), non-convergent (late-window mean gain stays above
    kappa times the early-window mean), late-oscillatory (repeated sign
    flips below t_late), else monotone-stable.
    """
    gains = series.gains
    pts = series.grid.points
    mids = series.midpoints()
    peak = max(abs(g) for g in gains)
    norm = [g / peak for g in gains] if peak > 0.0 else [0.0 for _ in gains]

    late = [m for m, t in enumerate(mids) if t < cfg.t_late]
    early = [m for m, t in enumerate(mids) if t >= cfg.t_late]

    initial_regressive = norm[-1] < -cfg.tau_neg

    non_convergent = False
    if late and early:
        late_mean = sum(gains[m] for m in late) / len(late)
        early_mean = sum(gains[m] for m in early) / len(early)
        non_convergent = late_mean > cfg.kappa * early_mean

    flips = 0
    for a in range(1, len(late)):
        if gains[late[a - 1]] * gains[late[a]] < 0.0:
            flips += 1
    oscillatory = flips >= cfg.n_osc

    all_positive = all(g > 0.0 for g in gains)
    decaying = all(norm[m + 1] >= norm[m] - cfg.mono_tol for m in range(len(norm) - 1))

    if initial_regressive:
        label = "initial-regressive"
    elif non_convergent:
        label = "non-convergent"
    elif oscillatory:
        label = "late-oscillatory"
    else:
        label = "monotone-stable"

    # Start hint: drop any run of regressive intervals at the largest times.
    m = len(norm) - 1
    while m >= 0 and norm[m] < -cfg.tau_neg:
        m -= 1
    suggested_start = pts[m + 1]

    # Stop hint: cut a non-convergent tail at the late-window boundary.
    if label == "non-convergent":
        above = [t for t in pts if t >= cfg.t_late]
        suggested_stop = min(above) if above else pts[0]
    else:
        suggested_stop = pts[0]
    suggested_stop = min(suggested_stop, suggested_start)

    return StabilityReport(
        label=label,
        negative_gain_regions=_negative_regions(series),
        suggested_start=suggested_start,
        suggested_stop=suggested_stop,
        details={
            "thresholds": {
                "tau_neg": cfg.tau_neg,
                "t_late": cfg.t_late,
                "n_osc": cfg.n_osc,
                "kappa": cfg.kappa,
                "mono_tol": cfg.mono_tol,
            },
            # kappa has no principled value; it is a stand-in heuristic.
            "kappa_heuristic": True,
            "late_sign_flips": flips,
            "all_gains_positive": all_positive,
            "gain_decaying": decaying,
        },
    )


def report_to_json_dict(report: StabilityReport) -> dict:
    return {
        "label": report.label,
        "negative_gain_regions": [[lo, hi] for lo, hi in report.negative_gain_regions],
        "suggested_start": report.suggested_start,
        "suggested_stop": report.suggested_stop,
        "details": report.details,
    }


def gain_csv_text(series: GainSeries) -> str:
    return csv_text(("t_mid", "gain"), zip(series.midpoints(), series.gains))
