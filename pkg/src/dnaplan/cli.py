"""Command-line surface: extract, predict, train, plan, verify, diagnose.

Every command materializes its full configuration into a RunManifest JSON
written next to its primary output; ``rerun`` replays a manifest and must
reproduce every output file byte for byte. Exit codes: 2 usage error,
3 invalid input (validation report on stderr), 4 infeasible request.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .diagnostics import (
    ClassifierConfig,
    classify,
    gain_csv_text,
    report_to_json_dict,
    stepwise_gain,
)
from .linearflow import (
    extract_dna,
    load_scenario,
    rollout,
    rollout_csv_text,
)
from .oracle import enumerate_best
from .planner import (
    InfeasiblePlanError,
    build_graph,
    plan_adaptive,
    plan_fixed,
    plan_unconstrained,
    restrict_nodes,
    schedule_from_json_dict,
    schedule_to_json_dict,
)
from .profile import (
    DnaProfile,
    ProfileValidationError,
    load_profile,
    save_profile,
    stride_indices,
    uniform_grid,
)
from .regressor import (
    TrainConfig,
    clamp_for_planning,
    forward,
    load_dataset,
    load_params,
    save_params,
    train,
)
from .serialize import dumps

EXIT_INVALID_INPUT = 3
EXIT_INFEASIBLE = 4


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ProfileValidationError as exc:
            for line in exc.violations:
                click.echo(f"invalid input: {line}", err=True)
            sys.exit(EXIT_INVALID_INPUT)
        except InfeasiblePlanError as exc:
            click.echo(f"infeasible: {exc}", err=True)
            sys.exit(EXIT_INFEASIBLE)
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            click.echo(f"invalid input: {exc}", err=True)
            sys.exit(EXIT_INVALID_INPUT)

    return wrapper


def _write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _write_manifest(command: str, args: dict, outputs: list[str], seed: int | None) -> str:
    primary = outputs[0]
    manifest_path = str(Path(primary).with_name(Path(primary).name + ".manifest.json"))
    doc = {
        "tool": "dnaplan",
        "version": __version__,
        "command": command,
        "args": args,
        "outputs": outputs + [manifest_path],
        "seed": seed,
    }
    _write_text(manifest_path, dumps(doc))
    return manifest_path


def _figure_path(out: str, suffix: str) -> str:
    return str(Path(out).with_name(Path(out).stem + suffix))


# Command bodies take plain keyword arguments so a manifest can replay them.


def _cmd_sim_extract(scenario: str, out: str, points: int | None, figures: bool) -> None:
    scen = load_scenario(scenario)
    grid = uniform_grid(points) if points else scen.error_grid
    dna = extract_dna(scen, grid)
    save_profile(dna, out)
    outputs = [out]
    if figures:
        from .figures import save_profile_figure

        fig = _figure_path(out, ".png")
        save_profile_figure(dna, fig)
        outputs.append(fig)
    _write_manifest(
        "sim-extract",
        {"scenario": scenario, "out": out, "points": points, "figures": figures},
        outputs,
        seed=None,
    )
    click.echo(f"extracted {len(grid.points)}-point profile -> {out}")


def _cmd_predict(params_file: str, embedding: str, out: str, figures: bool) -> None:
    params, grid = load_params(params_file)
    if grid is None:
        raise ProfileValidationError(
            ["params file carries no grid; train with a gridded dataset first"]
        )
    doc = json.loads(Path(embedding).read_text(encoding="utf-8"))
    vec = doc["embedding"] if isinstance(doc, dict) else doc
    raw = forward(params, np.asarray(vec, dtype=np.float64), training=False)
    values = clamp_for_planning(raw)
    dna = DnaProfile(grid=grid, values=tuple(values), meta={"source": "predictor"}).check()
    save_profile(dna, out)
    outputs = [out]
    if figures:
        from .figures import save_profile_figure

        fig = _figure_path(out, ".png")
        save_profile_figure(dna, fig)
        outputs.append(fig)
    _write_manifest(
        "predict",
        {"params_file": params_file, "embedding": embedding, "out": out, "figures": figures},
        outputs,
        seed=None,
    )
    click.echo(f"predicted {len(values)}-point profile -> {out}")


def _cmd_train_predictor(
    dataset: str,
    out: str,
    epochs: int,
    learning_rate: float,
    batch_size: int,
    dropout: float,
    seed: int,
    hidden: str,
    holdout: float,
) -> None:
    emb, vectors, grid = load_dataset(dataset)
    h1, h2 = (int(x) for x in hidden.split(","))
    cfg = TrainConfig(
        learning_rate=learning_rate,
        batch_size=batch_size,
        epochs=epochs,
        dropout=dropout,
        seed=seed,
        holdout_fraction=holdout,
    )
    result = train(list(zip(emb, vectors)), cfg, hidden=(h1, h2))
    info = {
        "epochs": epochs,
        "learning_rate": learning_rate,
        "batch_size": batch_size,
        "dropout": dropout,
        "seed": seed,
        "hidden": [h1, h2],
        "holdout_fraction": holdout,
        "n_train": result.n_train,
        "n_holdout": result.n_holdout,
        "holdout_cosine_mean": result.holdout_cosine_mean,
        "holdout_cosine_median": result.holdout_cosine_median,
        "final_train_loss": result.loss_history[-1],
    }
    save_params(result.params, out, grid=grid, training_info=info)
    _write_manifest(
        "train-predictor",
        {
            "dataset": dataset,
            "out": out,
            "epochs": epochs,
            "learning_rate": learning_rate,
            "batch_size": batch_size,
            "dropout": dropout,
            "seed": seed,
            "hidden": hidden,
            "holdout": holdout,
        },
        [out],
        seed=seed,
    )
    click.echo(
        f"trained on {result.n_train} pairs; holdout mean cosine "
        f"{result.holdout_cosine_mean:.4f} (median {result.holdout_cosine_median:.4f})"
    )


def _parse_restrict(spec: str | None, n_points: int) -> list[int] | None:
    if spec is None:
        return None
    kind, _, payload = spec.partition(":")
    if kind == "stride" and payload:
        return stride_indices(n_points, int(payload))
    if kind == "idx" and payload:
        return sorted(set(int(x) for x in payload.split(",")))
    raise ValueError(f"bad --restrict spec {spec!r}; use stride:S or idx:i,j,...")


def _cmd_plan(
    dna_file: str,
    out: str,
    steps: int | None,
    adaptive: bool,
    rho: float,
    max_steps: int | None,
    partial_mode: str,
    pin_start: bool,
    pin_end: bool,
    restrict: str | None,
    figures: bool,
) -> None:
    dna = load_profile(dna_file)
    graph = build_graph(dna, pin_start=pin_start, pin_end=pin_end)
    allowed = _parse_restrict(restrict, len(dna.grid.points))
    if allowed is not None:
        graph = restrict_nodes(graph, allowed)

    rho_curve = None
    if adaptive:
        if max_steps is None:
            raise click.UsageError("--adaptive requires --max-steps")
        result = plan_adaptive(graph, rho_th=rho, k_max=max_steps, partial_mode=partial_mode)
        schedule = result.schedule
        rho_curve = result.rho_curve
    elif steps is not None:
        schedule = plan_fixed(graph, steps)
    else:
        schedule = plan_unconstrained(graph)

    _write_text(out, dumps(schedule_to_json_dict(schedule, rho_curve=rho_curve)))
    outputs = [out]
    if figures and rho_curve is not None:
        from .figures import save_rho_curve_figure

        fig = _figure_path(out, ".rho.png")
        save_rho_curve_figure(rho_curve, rho, fig)
        outputs.append(fig)
    _write_manifest(
        "plan",
        {
            "dna_file": dna_file,
            "out": out,
            "steps": steps,
            "adaptive": adaptive,
            "rho": rho,
            "max_steps": max_steps,
            "partial_mode": partial_mode,
            "pin_start": pin_start,
            "pin_end": pin_end,
            "restrict": restrict,
            "figures": figures,
        },
        outputs,
        seed=None,
    )
    click.echo(
        f"{schedule.steps}-step schedule, total cost "
        f"{schedule.total_cost:.6g} -> {out}"
    )


def _cmd_oracle(
    dna_file: str,
    out: str,
    steps: int | None,
    pin_start: bool,
    pin_end: bool,
) -> None:
    dna = load_profile(dna_file)
    try:
        result = enumerate_best(dna, k_steps=steps, pin_start=pin_start, pin_end=pin_end)
    except ValueError as exc:
        raise InfeasiblePlanError(str(exc)) from None
    doc = {
        "timesteps": list(result.best_sequence),
        "total_cost": result.best_cost,
        "gain": -result.best_cost,
        "steps": len(result.best_sequence) - 1,
        "enumerated_count": result.enumerated_count,
        "source": dict(dna.meta),
    }
    _write_text(out, dumps(doc))
    _write_manifest(
        "oracle",
        {
            "dna_file": dna_file,
            "out": out,
            "steps": steps,
            "pin_start": pin_start,
            "pin_end": pin_end,
        },
        [out],
        seed=None,
    )
    click.echo(
        f"enumerated {result.enumerated_count} sequences; best cost "
        f"{result.best_cost:.6g} -> {out}"
    )


def _cmd_diagnose(
    dna_file: str,
    out: str,
    gain_csv: str | None,
    tau_neg: float,
    t_late: float,
    n_osc: int,
    kappa: float,
    mono_tol: float,
    figures: bool,
) -> None:
    dna = load_profile(dna_file)
    series = stepwise_gain(dna)
    cfg = ClassifierConfig(
        tau_neg=tau_neg, t_late=t_late, n_osc=n_osc, kappa=kappa, mono_tol=mono_tol
    )
    report = classify(series, cfg)
    _write_text(out, dumps(report_to_json_dict(report)))
    csv_path = gain_csv or _figure_path(out, ".gain.csv")
    _write_text(csv_path, gain_csv_text(series))
    outputs = [out, csv_path]
    if figures:
        from .figures import save_gain_figure

        fig = _figure_path(out, ".gain.png")
        save_gain_figure(series, report.label, fig)
        outputs.append(fig)
    _write_manifest(
        "diagnose",
        {
            "dna_file": dna_file,
            "out": out,
            "gain_csv": gain_csv,
            "tau_neg": tau_neg,
            "t_late": t_late,
            "n_osc": n_osc,
            "kappa": kappa,
            "mono_tol": mono_tol,
            "figures": figures,
        },
        outputs,
        seed=None,
    )
    click.echo(f"label: {report.label} -> {out}")


def _cmd_rollout(
    scenario: str, schedule_file: str, out: str, correction: bool, figures: bool
) -> None:
    scen = load_scenario(scenario)
    schedule = schedule_from_json_dict(
        json.loads(Path(schedule_file).read_text(encoding="utf-8"))
    )
    report = rollout(scen, schedule.timesteps, correction=correction)
    _write_text(out, rollout_csv_text(report))
    outputs = [out]
    if figures:
        from .figures import save_rollout_figure

        fig = _figure_path(out, ".png")
        save_rollout_figure(report, fig)
        outputs.append(fig)
    _write_manifest(
        "rollout",
        {
            "scenario": scenario,
            "schedule_file": schedule_file,
            "out": out,
            "correction": correction,
            "figures": figures,
        },
        outputs,
        seed=None,
    )
    click.echo(
        f"rollout over {len(report.timesteps)} states; final err^2 "
        f"{report.final_err_sq:.6g} -> {out}"
    )


_COMMANDS = {
    "sim-extract": _cmd_sim_extract,
    "predict": _cmd_predict,
    "train-predictor": _cmd_train_predictor,
    "plan": _cmd_plan,
    "oracle": _cmd_oracle,
    "diagnose": _cmd_diagnose,
    "rollout": _cmd_rollout,
}


@click.group()
@click.version_option(version=__version__, prog_name="dnaplan")
def main() -> None:
    """Plan diffusion sampling schedules from per-timestep difficulty profiles."""


@main.command("sim-extract")
@click.argument("scenario", type=click.Path())
@click.option("-o", "--out", required=True, type=click.Path(), help="Output profile (JSON or CSV).")
@click.option("--points", type=int, default=None,
              help="Measure on a uniform grid with this many points instead of the scenario grid.")
@click.option("--figures/--no-figures", default=True, show_default=True,
              help="Also render a PNG next to the output.")
@_guard
def sim_extract_cmd(scenario: str, out: str, points: int | None, figures: bool) -> None:
    """Measure a difficulty profile from a linear-flow scenario."""
    _cmd_sim_extract(scenario, out, points, figures)


@main.command("predict")
@click.argument("params_file", type=click.Path())
@click.argument("embedding", type=click.Path())
@click.option("-o", "--out", required=True, type=click.Path(), help="Output profile (JSON or CSV).")
@click.option("--figures/--no-figures", default=True, show_default=True)
@_guard
def predict_cmd(params_file: str, embedding: str, out: str, figures: bool) -> None:
    """Predict a difficulty profile from a condition embedding."""
    _cmd_predict(params_file, embedding, out, figures)


@main.command("train-predictor")
@click.argument("dataset", type=click.Path())
@click.option("-o", "--out", required=True, type=click.Path(), help="Output params JSON.")
@click.option("--epochs", type=int, default=60, show_default=True)
@click.option("--learning-rate", type=float, default=1e-3, show_default=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--dropout", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--hidden", type=str, default="256,256", show_default=True,
              help="Hidden layer widths as H1,H2.")
@click.option("--holdout", type=float, default=0.1, show_default=True,
              help="Held-out fraction for the fit report.")
@_guard
def train_predictor_cmd(**kwargs) -> None:
    """Train the profile regressor on an (embedding, dna) dataset."""
    _cmd_train_predictor(**kwargs)


@main.command("plan")
@click.argument("dna_file", type=click.Path())
@click.option("-o", "--out", required=True, type=click.Path(), help="Output schedule JSON.")
@click.option("--steps", type=int, default=None, help="Exact transition budget.")
@click.option("--adaptive", is_flag=True, default=False,
              help="Stop at the explained-gain threshold instead of a fixed budget.")
@click.option("--rho", type=float, default=0.99, show_default=True,
              help="Explained-gain threshold for --adaptive.")
@click.option("--max-steps", type=int, default=None,
              help="Largest budget considered by --adaptive (required with it).")
@click.option("--partial-mode", type=click.Choice(["replan", "prefix"]), default="replan",
              show_default=True, help="How --adaptive prices an n-step partial plan.")
@click.option("--pin-start/--no-pin-start", default=True, show_default=True,
              help="Force the plan to start at the largest grid point.")
@click.option("--pin-end/--no-pin-end", default=True, show_default=True,
              help="Force the plan to stop at the smallest grid point.")
@click.option("--restrict", type=str, default=None,
              help="Limit planning to a node subset: stride:S or idx:i,j,...")
@click.option("--figures/--no-figures", default=True, show_default=True)
@_guard
def plan_cmd(**kwargs) -> None:
    """Plan a schedule from a difficulty profile."""
    if kwargs["steps"] is not None and kwargs["adaptive"]:
        raise click.UsageError("--steps and --adaptive are mutually exclusive")
    _cmd_plan(**kwargs)


@main.command("oracle")
@click.argument("dna_file", type=click.Path())
@click.option("-o", "--out", required=True, type=click.Path(), help="Output schedule JSON.")
@click.option("--steps", type=int, default=None, help="Exact transition budget.")
@click.option("--pin-start/--no-pin-start", default=True, show_default=True)
@click.option("--pin-end/--no-pin-end", default=True, show_default=True)
@_guard
def oracle_cmd(**kwargs) -> None:
    """Brute-force reference plan for small grids (<= 16 points)."""
    _cmd_oracle(**kwargs)


@main.command("diagnose")
@click.argument("dna_file", type=click.Path())
@click.option("-o", "--out", required=True, type=click.Path(), help="Output report JSON.")
@click.option("--gain-csv", type=click.Path(), default=None,
              help="Gain CSV path (default: next to the report).")
@click.option("--tau-neg", type=float, default=0.01, show_default=True)
@click.option("--t-late", type=float, default=0.4, show_default=True)
@click.option("--n-osc", type=int, default=3, show_default=True)
@click.option("--kappa", type=float, default=0.5, show_default=True)
@click.option("--mono-tol", type=float, default=0.02, show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
@_guard
def diagnose_cmd(**kwargs) -> None:
    """Classify a profile's stability regime and export its gain series."""
    _cmd_diagnose(**kwargs)


@main.command("rollout")
@click.argument("scenario", type=click.Path())
@click.argument("schedule_file", type=click.Path())
@click.option("-o", "--out", required=True, type=click.Path(), help="Output CSV.")
@click.option("--correction/--no-correction", default=True, show_default=True,
              help="Restart each jump from the on-trajectory state.")
@click.option("--figures/--no-figures", default=True, show_default=True)
@_guard
def rollout_cmd(**kwargs) -> None:
    """Execute a schedule in a linear-flow scenario and trace its drift."""
    _cmd_rollout(**kwargs)


@main.command("rerun")
@click.argument("manifest", type=click.Path())
@_guard
def rerun_cmd(manifest: str) -> None:
    """Replay a RunManifest; outputs must reproduce byte for byte."""
    doc = json.loads(Path(manifest).read_text(encoding="utf-8"))
    command = doc.get("command")
    if command not in _COMMANDS:
        raise ValueError(f"manifest names unknown command {command!r}")
    _COMMANDS[command](**doc["args"])


if __name__ == "__main__":
    main()
