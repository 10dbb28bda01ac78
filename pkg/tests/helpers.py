"""Shared scenario factories and sampling helpers for the test suite."""

from __future__ import annotations

import numpy as np

from obsplan.core import rollout_nominal
from obsplan.models import ObservationKind, SingleIntegrator
from obsplan.scenarios import ScenarioConfig


def toy_scenario(**overrides) -> ScenarioConfig:
    """Small, fast scenario: K = 3 range sensing with one nearby landmark."""
    params = dict(
        name="toy",
        observation=ObservationKind.RANGE,
        landmarks=[[0.35, 0.1]],
        sigma_x0=[[0.04, 0.0], [0.0, 0.04]],
        sigma_w=[[0.01, 0.0], [0.0, 0.01]],
        sigma_nu=0.05,
        x0_hat=[0.0, 0.0],
        goal=[0.9, 0.6],
        goal_radius=0.15,
        control_bound=0.8,
        horizon=3,
        waypoints=[[0.0, 0.0], [0.9, 0.6]],
    )
    params.update(overrides)
    return ScenarioConfig(**params)


def grid_scenario(**overrides) -> ScenarioConfig:
    """K = 2 instance whose goal is exactly reachable on the control grid."""
    params = dict(
        name="grid-toy",
        observation=ObservationKind.RANGE,
        landmarks=[[0.5, -0.2]],
        sigma_x0=[[0.09, 0.0], [0.0, 0.09]],
        sigma_w=[[0.02, 0.0], [0.0, 0.02]],
        sigma_nu=0.05,
        x0_hat=[0.0, 0.0],
        goal=[0.8, 0.4],
        goal_radius=0.1,
        control_bound=0.8,
        horizon=2,
        waypoints=[[0.0, 0.0], [0.8, 0.4]],
    )
    params.update(overrides)
    return ScenarioConfig(**params)


def feasible_controls(rng: np.random.Generator, horizon: int, bound: float) -> np.ndarray:
    """Random control sequence with every step norm within the bound."""
    controls = rng.uniform(-bound, bound, size=(horizon, 2))
    norms = np.linalg.norm(controls, axis=1)
    over = norms > bound
    controls[over] *= (0.95 * bound) / norms[over, None]
    return controls


def random_clear_trajectory(
    rng: np.random.Generator,
    horizon: int,
    bound: float = 0.8,
    x0=(-1.5, -0.5),
    clearance: float = 0.05,
    landmark=(0.0, 0.0),
):
    """Random feasible trajectory whose states all keep clear of a landmark."""
    process = SingleIntegrator()
    landmark = np.asarray(landmark, dtype=float)
    for _ in range(100):
        controls = feasible_controls(rng, horizon, bound)
        traj = rollout_nominal(process, np.asarray(x0, dtype=float), controls)
        if np.linalg.norm(traj.states - landmark, axis=1).min() >= clearance:
            return traj
    raise AssertionError("could not sample a trajectory clear of the landmark")
