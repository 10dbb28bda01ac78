"""Trajectory planning toolkit for a planar range-sensing robot.

Compares information-matrix (observability Gramian / Fisher) planning
objectives against the cumulative posterior-covariance trace along the same
scenarios, with a CLI that writes CSV tables, JSON reports and SVG figures.
"""

__version__ = "0.1.0"

from .comparison import ArmResult, ComparisonReport, compare, cumulative_trace
from .core import (
    LinearizationSequence,
    NominalTrajectory,
    RolloutDivergenceError,
    SingularMatrixError,
    rollout_nominal,
)
from .gramian import (
    DEGENERATE_SENTINEL,
    GramianKind,
    GramianResult,
    MeasureKind,
    gramian_measure,
    gramian_measure_info,
    observability_gramian,
    sfim,
)
from .models import (
    CombineMode,
    JacobianSingularityError,
    ObservationKind,
    ObservationModel,
    SingleIntegrator,
    linearize_trajectory,
)
from .planner import (
    CovTraceObjective,
    GramianObjective,
    PlanProblem,
    PlanResult,
    evaluate_constraints,
    evaluate_objective,
    initial_trajectory,
    solve,
)
from .riccati import CovarianceTrace, analytic_one_step_trace, predict, propagate, update
from .scenarios import ConfigError, ScenarioConfig, config_from_dict, config_to_dict, load_config, preset

__all__ = [
    "ArmResult",
    "CombineMode",
    "ComparisonReport",
    "ConfigError",
    "CovTraceObjective",
    "CovarianceTrace",
    "DEGENERATE_SENTINEL",
    "GramianKind",
    "GramianObjective",
    "GramianResult",
    "JacobianSingularityError",
    "LinearizationSequence",
    "MeasureKind",
    "NominalTrajectory",
    "ObservationKind",
    "ObservationModel",
    "PlanProblem",
    "PlanResult",
    "RolloutDivergenceError",
    "ScenarioConfig",
    "SingleIntegrator",
    "SingularMatrixError",
    "analytic_one_step_trace",
    "compare",
    "config_from_dict",
    "config_to_dict",
    "cumulative_trace",
    "evaluate_constraints",
    "evaluate_objective",
    "gramian_measure",
    "gramian_measure_info",
    "initial_trajectory",
    "linearize_trajectory",
    "load_config",
    "observability_gramian",
    "predict",
    "preset",
    "propagate",
    "rollout_nominal",
    "sfim",
    "solve",
    "update",
]
