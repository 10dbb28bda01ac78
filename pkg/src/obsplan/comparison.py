"""Three-way comparison: seed trajectory vs information-optimized vs trace-optimized.

Both optimized arms start from the same waypoint-seeded controls. Every arm is
then scored the same way, by propagating the posterior covariance along its
trajectory and summing the trace over t = 1..K.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from .core import FloatArray, NominalTrajectory, ascending_sum, rollout_nominal
from .gramian import MeasureKind
from .models import linearize_trajectory
from .planner import (
    CovTraceObjective,
    GramianObjective,
    PlanProblem,
    PlanResult,
    initial_trajectory,
    segment_allocation,
    solve,
)
from .riccati import propagate
from .scenarios import ScenarioConfig


def cumulative_trace(series: npt.ArrayLike) -> float:
    """Sum of a trace series over t = 1..K, excluding the prior at t = 0."""
    values = np.asarray(series, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("trace series must be 1-D with at least two entries")
    return ascending_sum(values[1:])


@dataclass(frozen=True)
class ArmResult:
    """One comparison arm: its controls, trajectory, and covariance score."""

    label: str
    controls: FloatArray
    trajectory: NominalTrajectory
    traces: FloatArray  # (K+1,) posterior-covariance traces
    cumulative: float
    plan: PlanResult | None = None  # None for the seed arm


@dataclass(frozen=True)
class ComparisonReport:
    """Results of one scenario comparison plus reproducibility metadata."""

    scenario: ScenarioConfig
    measure: MeasureKind
    initial: ArmResult
    og: ArmResult
    cov: ArmResult
    metadata: dict[str, Any]

    @property
    def arms(self) -> tuple[ArmResult, ArmResult, ArmResult]:
        return (self.initial, self.og, self.cov)

    @property
    def gap_ratio(self) -> float:
        """Relative excess of the information arm over the trace arm."""
        return (self.og.cumulative - self.cov.cumulative) / self.cov.cumulative


def trace_along(scenario: ScenarioConfig, controls: npt.ArrayLike) -> FloatArray:
    """Posterior-covariance traces along the rollout of a control sequence."""
    process = scenario.process_model()
    observation = scenario.observation_model()
    traj = rollout_nominal(process, scenario.x0_hat, np.asarray(controls, dtype=float))
    lin = linearize_trajectory(process, observation, traj)
    return propagate(lin, scenario.sigma_w, scenario.sigma_nu, scenario.sigma_x0).traces


def _arm(scenario: ScenarioConfig, label: str, controls: FloatArray, plan: PlanResult | None) -> ArmResult:
    process = scenario.process_model()
    observation = scenario.observation_model()
    traj = rollout_nominal(process, scenario.x0_hat, controls)
    lin = linearize_trajectory(process, observation, traj)
    cov = propagate(lin, scenario.sigma_w, scenario.sigma_nu, scenario.sigma_x0)
    return ArmResult(
        label=label,
        controls=controls,
        trajectory=traj,
        traces=cov.traces,
        cumulative=cov.cumulative,
        plan=plan,
    )


def compare(
    scenario: ScenarioConfig,
    measure: MeasureKind = MeasureKind.CONDITION_NUMBER,
    seed: int = 0,
    restarts: int = 0,
    cov_plan: PlanResult | None = None,
) -> ComparisonReport:
    """Solve both planning problems from the shared seed and score all arms.

    Solver non-convergence is recorded per arm, never raised. A precomputed
    trace-arm solve may be passed in so measure sweeps solve it only once.
    """
    seed_controls = initial_trajectory(scenario.waypoints, scenario.horizon, scenario.control_bound)

    og_plan = solve(PlanProblem(scenario, GramianObjective(measure)), seed_controls, restarts, seed)
    if cov_plan is None:
        cov_plan = solve(PlanProblem(scenario, CovTraceObjective()), seed_controls, restarts, seed)

    report = ComparisonReport(
        scenario=scenario,
        measure=measure,
        initial=_arm(scenario, "initial", seed_controls, None),
        og=_arm(scenario, "og", og_plan.controls, og_plan),
        cov=_arm(scenario, "cov", cov_plan.controls, cov_plan),
        metadata={
            "scenario": scenario.name,
            "measure": measure.value,
            "seed": seed,
            "restarts": restarts,
            "initial_allocation": segment_allocation(scenario.waypoints, scenario.horizon),
        },
    )
    return report
