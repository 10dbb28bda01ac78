"""Run-artifact writers: delimited tables, JSON reports, and SVG figures.

A run directory holds scenario.json (the resolved configuration echo),
report.json, traces.csv, trajectory.csv, plot_traces.svg and plot_paths.svg.
Floats are printed with 17 significant digits so the CSV round-trips exactly,
and the figures are rendered with a fixed hash salt and no date metadata so
artifacts are re-derivable from scenario.json and the tool version alone.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__
from .comparison import ArmResult, ComparisonReport, cumulative_trace
from .core import rollout_nominal
from .planner import PlanResult
from .scenarios import ScenarioConfig, config_to_dict

_ARM_STYLES = {
    "initial": dict(color="tab:orange", linestyle="--"),
    "og": dict(color="tab:red", linestyle="-"),
    "cov": dict(color="tab:cyan", linestyle="-"),
}


def fmt(value: float) -> str:
    """17-significant-digit rendering; round-trips float64 exactly."""
    return f"{float(value):.17g}"


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    matplotlib.rcParams["svg.hashsalt"] = "obsplan"
    import matplotlib.pyplot as plt

    return plt


def write_traces_csv(path: Path, series: Mapping[str, np.ndarray]) -> None:
    """Table of per-step covariance traces, one column per arm."""
    labels = list(series)
    length = len(next(iter(series.values())))
    lines = ["t," + ",".join(labels)]
    for t in range(length):
        lines.append(f"{t}," + ",".join(fmt(series[label][t]) for label in labels))
    path.write_text("\n".join(lines) + "\n")


def read_traces_csv(path: Path) -> dict[str, np.ndarray]:
    """Parse a traces table back into per-arm series."""
    lines = path.read_text().strip().splitlines()
    labels = lines[0].split(",")[1:]
    columns = {label: [] for label in labels}
    for line in lines[1:]:
        cells = line.split(",")
        for label, cell in zip(labels, cells[1:]):
            columns[label].append(float(cell))
    return {label: np.asarray(values) for label, values in columns.items()}


def write_trajectory_csv(path: Path, arms: Sequence[tuple[str, np.ndarray]]) -> None:
    """Long-format state table: t, x, y, arm."""
    lines = ["t,x,y,arm"]
    for label, states in arms:
        for t, state in enumerate(states):
            lines.append(f"{t},{fmt(state[0])},{fmt(state[1])},{label}")
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload: dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")


def _plan_summary(plan: PlanResult | None) -> dict[str, Any] | None:
    if plan is None:
        return None
    return {
        "objective_value": plan.objective_value,
        "terminal_residual": plan.terminal_residual,
        "control_residual": plan.control_residual,
        "iterations": plan.iterations,
        "converged": plan.converged,
        "diagnostics": {k: v for k, v in plan.diagnostics.items()},
    }


def _arm_payload(arm: ArmResult) -> dict[str, Any]:
    return {
        "cumulative_trace": arm.cumulative,
        "traces": arm.traces.tolist(),
        "controls": arm.controls.tolist(),
        "solver": _plan_summary(arm.plan),
    }


def comparison_payload(report: ComparisonReport) -> dict[str, Any]:
    return {
        "schema": "compare-report/1",
        "tool_version": __version__,
        "scenario": report.scenario.name,
        "measure": report.measure.value,
        "gap_ratio": report.gap_ratio,
        "orderings": {
            "cov_leq_initial": bool(report.cov.cumulative <= report.initial.cumulative),
            "cov_lt_og": bool(report.cov.cumulative < report.og.cumulative),
            "og_geq_initial": bool(report.og.cumulative >= report.initial.cumulative),
        },
        "arms": {arm.label: _arm_payload(arm) for arm in report.arms},
        "metadata": report.metadata,
    }


def plan_payload(
    scenario: ScenarioConfig,
    label: str,
    plan: PlanResult,
    initial_objective: float,
    traces: Mapping[str, np.ndarray],
    metadata: dict[str, Any],
) -> dict[str, Any]:
    return {
        "schema": "plan-report/1",
        "tool_version": __version__,
        "scenario": scenario.name,
        "objective": label,
        "objective_value": plan.objective_value,
        "initial_objective": initial_objective,
        "terminal_residual": plan.terminal_residual,
        "control_residual": plan.control_residual,
        "iterations": plan.iterations,
        "converged": plan.converged,
        "cumulative_traces": {name: cumulative_trace(series) for name, series in traces.items()},
        "controls": plan.controls.tolist(),
        "diagnostics": {k: v for k, v in plan.diagnostics.items()},
        "metadata": metadata,
    }


def render_traces_figure(path: Path, series: Mapping[str, np.ndarray]) -> None:
    """Trace-vs-step line chart, one line per arm."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    steps = np.arange(len(next(iter(series.values()))))
    for label, values in series.items():
        ax.plot(steps, values, label=label, **_ARM_STYLES.get(label, {}))
    ax.set_xlabel("time step")
    ax.set_ylabel("trace of posterior covariance [m$^2$]")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_paths_figure(
    path: Path,
    arms: Sequence[tuple[str, np.ndarray]],
    scenario: ScenarioConfig,
) -> None:
    """Planar view of the arm trajectories, landmarks, start and goal ball."""
    plt = _pyplot()
    from matplotlib.patches import Circle

    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.scatter(
        scenario.landmarks[:, 0],
        scenario.landmarks[:, 1],
        s=220,
        c="gold",
        alpha=0.5,
        marker="o",
        edgecolors="none",
        label="landmarks",
        zorder=1,
    )
    for label, states in arms:
        ax.plot(states[:, 0], states[:, 1], marker=".", label=label, **_ARM_STYLES.get(label, {}))
    ax.plot(*scenario.x0_hat, marker="D", color="green", linestyle="none", label="start estimate")
    ax.add_patch(
        Circle(tuple(scenario.goal), scenario.goal_radius, fill=False, color="purple", label="goal region")
    )
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_compare_artifact(outdir: Path, report: ComparisonReport) -> None:
    """Full run directory for a comparison."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    series = {arm.label: arm.traces for arm in report.arms}
    arms_states = [(arm.label, arm.trajectory.states) for arm in report.arms]
    write_json(outdir / "scenario.json", config_to_dict(report.scenario))
    write_json(outdir / "report.json", comparison_payload(report))
    write_traces_csv(outdir / "traces.csv", series)
    write_trajectory_csv(outdir / "trajectory.csv", arms_states)
    render_traces_figure(outdir / "plot_traces.svg", series)
    render_paths_figure(outdir / "plot_paths.svg", arms_states, report.scenario)


def write_plan_artifact(
    outdir: Path,
    scenario: ScenarioConfig,
    label: str,
    plan: PlanResult,
    initial_controls: np.ndarray,
    initial_traces: np.ndarray,
    plan_traces: np.ndarray,
    initial_objective: float,
    metadata: dict[str, Any],
) -> None:
    """Run directory for a single optimization (seed arm plus planned arm)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    series = {"initial": initial_traces, label: plan_traces}
    process = scenario.process_model()
    seed_states = rollout_nominal(process, scenario.x0_hat, initial_controls).states
    arms_states = [("initial", seed_states), (label, plan.trajectory.states)]
    write_json(outdir / "scenario.json", config_to_dict(scenario))
    write_json(
        outdir / "report.json",
        plan_payload(scenario, label, plan, initial_objective, series, metadata),
    )
    write_traces_csv(outdir / "traces.csv", series)
    write_trajectory_csv(outdir / "trajectory.csv", arms_states)
    render_traces_figure(outdir / "plot_traces.svg", series)
    render_paths_figure(outdir / "plot_paths.svg", arms_states, scenario)
