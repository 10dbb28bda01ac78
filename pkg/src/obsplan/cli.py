"""Command-line front end: plan, compare and sweep subcommands.

Exit codes: 0 success, 2 scenario validation failure (the message names the
offending field), 3 solver non-convergence (artifacts are still written).
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from . import __version__
from .comparison import compare, trace_along
from .gramian import MeasureKind
from .planner import (
    CovTraceObjective,
    GramianObjective,
    PlanProblem,
    evaluate_objective,
    initial_trajectory,
    segment_allocation,
    solve,
)
from .report import fmt, write_compare_artifact, write_plan_artifact
from .scenarios import ConfigError, ScenarioConfig, load_config, preset

EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3


def _echo(message: str, fg: str | None = None) -> None:
    use_color = fg is not None and not os.environ.get("NO_COLOR") and sys.stdout.isatty()
    click.echo(click.style(message, fg=fg) if use_color else message)


def _resolve_scenario(config: str | None, preset_name: str | None) -> ScenarioConfig:
    if (config is None) == (preset_name is None):
        _echo("provide exactly one of a scenario file or --preset", fg="red")
        sys.exit(EXIT_CONFIG)
    try:
        if preset_name is not None:
            return preset(preset_name)
        return load_config(config)
    except ConfigError as exc:
        _echo(f"invalid scenario: {exc}", fg="red")
        sys.exit(EXIT_CONFIG)


def _parse_objective(text: str):
    if text == "cov":
        return "cov", CovTraceObjective()
    if text.startswith("og:"):
        name = text[3:]
        try:
            return "og", GramianObjective(MeasureKind(name))
        except ValueError:
            valid = ", ".join(m.value for m in MeasureKind)
            _echo(f"unknown measure {name!r}; valid measures: {valid}", fg="red")
            sys.exit(EXIT_CONFIG)
    _echo(f"objective must be 'cov' or 'og:<measure>', got {text!r}", fg="red")
    sys.exit(EXIT_CONFIG)


def _parse_measure(name: str) -> MeasureKind:
    try:
        return MeasureKind(name)
    except ValueError:
        valid = ", ".join(m.value for m in MeasureKind)
        _echo(f"unknown measure {name!r}; valid measures: {valid}", fg="red")
        sys.exit(EXIT_CONFIG)


@click.group()
@click.version_option(version=__version__, prog_name="obsplan")
def main() -> None:
    """Trajectory planning with information-matrix and covariance-trace objectives."""


@main.command("plan")
@click.argument("config", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--preset", "preset_name", type=click.Choice(["A", "B", "C"]), default=None, help="Built-in scenario, bypasses the config file.")
@click.option("--objective", default="cov", show_default=True, help="'cov' or 'og:<measure>'.")
@click.option("--out", "outdir", required=True, type=click.Path(file_okay=False), help="Output directory for run artifacts.")
@click.option("--restarts", default=0, show_default=True, help="Extra perturbed solver starts.")
@click.option("--seed", default=0, show_default=True, help="Seed for restart perturbations.")
def cmd_plan(config, preset_name, objective, outdir, restarts, seed) -> None:
    """Optimize one objective on a scenario and write the run artifacts."""
    scenario = _resolve_scenario(config, preset_name)
    label, objective_obj = _parse_objective(objective)

    problem = PlanProblem(scenario, objective_obj)
    seed_controls = initial_trajectory(scenario.waypoints, scenario.horizon, scenario.control_bound)
    initial_objective = evaluate_objective(problem, seed_controls)
    plan = solve(problem, seed_controls, restarts=restarts, seed=seed)

    write_plan_artifact(
        Path(outdir),
        scenario,
        label,
        plan,
        initial_controls=seed_controls,
        initial_traces=trace_along(scenario, seed_controls),
        plan_traces=trace_along(scenario, plan.controls),
        initial_objective=initial_objective,
        metadata={
            "objective": objective,
            "seed": seed,
            "restarts": restarts,
            "initial_allocation": segment_allocation(scenario.waypoints, scenario.horizon),
        },
    )
    _echo(
        f"{scenario.name} {label}: objective {fmt(plan.objective_value)}"
        f" (seed trajectory {fmt(initial_objective)}), converged={plan.converged}",
        fg="green" if plan.converged else "yellow",
    )
    if not plan.converged:
        sys.exit(EXIT_NOT_CONVERGED)


@main.command("compare")
@click.argument("config", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--preset", "preset_name", type=click.Choice(["A", "B", "C"]), default=None, help="Built-in scenario, bypasses the config file.")
@click.option("--measure", default="condition_number", show_default=True, help="Information-matrix measure for the og arm.")
@click.option("--out", "outdir", required=True, type=click.Path(file_okay=False), help="Output directory for run artifacts.")
@click.option("--restarts", default=0, show_default=True)
@click.option("--seed", default=0, show_default=True)
def cmd_compare(config, preset_name, measure, outdir, restarts, seed) -> None:
    """Run the three-way comparison (seed, og arm, cov arm) and write artifacts."""
    scenario = _resolve_scenario(config, preset_name)
    kind = _parse_measure(measure)

    report = compare(scenario, kind, seed=seed, restarts=restarts)
    write_compare_artifact(Path(outdir), report)

    for arm in report.arms:
        status = "" if arm.plan is None else f", converged={arm.plan.converged}"
        _echo(f"arm {arm.label}: cumulative trace {fmt(arm.cumulative)}{status}")
    _echo(f"gap ratio (og - cov) / cov = {fmt(report.gap_ratio)}")
    solved = [arm.plan for arm in report.arms if arm.plan is not None]
    if not all(plan.converged for plan in solved):
        sys.exit(EXIT_NOT_CONVERGED)


@main.command("sweep")
@click.argument("config", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--preset", "preset_name", type=click.Choice(["A", "B", "C"]), default=None, help="Built-in scenario, bypasses the config file.")
@click.option("--measures", default="all", show_default=True, help="'all' or comma-separated measure names.")
@click.option("--out", "outdir", required=True, type=click.Path(file_okay=False), help="Output directory; one subdirectory per measure.")
@click.option("--restarts", default=0, show_default=True)
@click.option("--seed", default=0, show_default=True)
def cmd_sweep(config, preset_name, measures, outdir, restarts, seed) -> None:
    """Compare every requested measure against the single shared cov solve."""
    scenario = _resolve_scenario(config, preset_name)
    if measures == "all":
        kinds = list(MeasureKind)
    else:
        kinds = [_parse_measure(name.strip()) for name in measures.split(",")]

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)

    # The cov arm does not depend on the measure: solve it once and share it.
    seed_controls = initial_trajectory(scenario.waypoints, scenario.horizon, scenario.control_bound)
    cov_plan = solve(PlanProblem(scenario, CovTraceObjective()), seed_controls, restarts=restarts, seed=seed)

    rows = []
    failures = 0
    for kind in kinds:
        try:
            report = compare(scenario, kind, seed=seed, restarts=restarts, cov_plan=cov_plan)
            write_compare_artifact(out / kind.value, report)
            rows.append(
                (kind.value, report.initial.cumulative, report.og.cumulative, report.cov.cumulative, report.gap_ratio)
            )
            _echo(f"{kind.value}: og {fmt(report.og.cumulative)} vs cov {fmt(report.cov.cumulative)}")
        except Exception as exc:  # isolate failures per measure
            failures += 1
            _echo(f"{kind.value}: failed ({exc})", fg="red")

    lines = ["measure,initial,og,cov,gap_ratio"]
    for name, init_val, og_val, cov_val, gap in rows:
        lines.append(f"{name},{fmt(init_val)},{fmt(og_val)},{fmt(cov_val)},{fmt(gap)}")
    (out / "summary.csv").write_text("\n".join(lines) + "\n")
    if failures:
        sys.exit(EXIT_NOT_CONVERGED)


if __name__ == "__main__":
    main()
