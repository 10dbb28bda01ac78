"""Scenario configuration, the three benchmark presets, and their JSON form.

A scenario bundles everything a planning run needs: models, noise levels, the
initial belief, goal region, horizon, bounds, and the waypoints that seed the
solver. Units are meters throughout; covariances are stored as row-major
nested lists in JSON so files round-trip bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np

from .core import FloatArray, as_covariance, as_vector
from .models import CombineMode, ObservationKind, ObservationModel, SingleIntegrator

_PROCESS_KINDS = ("single_integrator",)


class ConfigError(ValueError):
    """Scenario validation failure; the message starts with the field path."""

    def __init__(self, field: str, problem: str):
        self.field = field
        super().__init__(f"{field}: {problem}")


@dataclass(frozen=True, eq=False, kw_only=True)
class ScenarioConfig:
    """Complete problem instance for planning and comparison runs."""

    name: str = "custom"
    process: str = "single_integrator"
    observation: ObservationKind = ObservationKind.RANGE
    combine: CombineMode = CombineMode.STACKED
    landmarks: FloatArray = None  # (n_L, 2)
    sigma_x0: FloatArray = None  # (2, 2) initial belief covariance
    sigma_w: FloatArray = None  # (2, 2) process noise covariance
    sigma_nu: float | FloatArray = 0.1  # scalar shared variance or full matrix
    x0_hat: FloatArray = None  # initial estimate (plan start)
    goal: FloatArray = None
    goal_radius: float = 0.1
    control_bound: float = 0.8
    horizon: int = 7
    control_weight: FloatArray = None  # (2, 2) PSD effort weight, zero by default
    waypoints: FloatArray = None  # (m, 2) solver-seed polyline

    def __post_init__(self) -> None:
        def put(name: str, value: Any) -> None:
            object.__setattr__(self, name, value)

        def check(name: str, coerce, *args):
            try:
                return coerce(*args)
            except (ValueError, TypeError) as exc:
                raise ConfigError(name, str(exc)) from None

        if self.process not in _PROCESS_KINDS:
            raise ConfigError("process", f"unknown process kind {self.process!r}")
        put("observation", check("observation", ObservationKind, self.observation))
        put("combine", check("combine", CombineMode, self.combine))

        if self.landmarks is None:
            raise ConfigError("landmarks", "missing")
        marks = np.asarray(self.landmarks, dtype=float)
        # ObservationModel performs the full landmark validation.
        model = check("landmarks", ObservationModel, self.observation, marks, self.combine)
        put("landmarks", model.landmarks)

        for field_name in ("sigma_x0", "sigma_w"):
            value = getattr(self, field_name)
            if value is None:
                raise ConfigError(field_name, "missing")
            put(field_name, check(field_name, as_covariance, value, field_name))

        if np.isscalar(self.sigma_nu):
            if float(self.sigma_nu) <= 0:
                raise ConfigError("sigma_nu", f"must be positive, got {float(self.sigma_nu):g}")
            put("sigma_nu", float(self.sigma_nu))
        else:
            nu = check("sigma_nu", as_covariance, self.sigma_nu, "sigma_nu")
            if nu.shape != (model.n_z, model.n_z):
                raise ConfigError("sigma_nu", f"matrix form must be ({model.n_z}, {model.n_z}), got {nu.shape}")
            if np.linalg.eigvalsh(nu)[0] <= 0:
                raise ConfigError("sigma_nu", "matrix form must be positive definite")
            put("sigma_nu", nu)

        for field_name in ("x0_hat", "goal"):
            if getattr(self, field_name) is None:
                raise ConfigError(field_name, "missing")
            put(field_name, check(field_name, as_vector, getattr(self, field_name), 2, field_name))

        if not self.goal_radius > 0:
            raise ConfigError("goal_radius", f"must be positive, got {self.goal_radius:g}")
        if not self.control_bound > 0:
            raise ConfigError("control_bound", f"must be positive, got {self.control_bound:g}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ConfigError("horizon", f"must be an integer >= 1, got {self.horizon!r}")
        put("horizon", int(self.horizon))

        weight = np.zeros((2, 2)) if self.control_weight is None else self.control_weight
        put("control_weight", check("control_weight", as_covariance, weight, "control_weight"))

        if self.waypoints is None:
            put("waypoints", np.vstack([self.x0_hat, self.goal]))
        else:
            pts = np.asarray(self.waypoints, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
                raise ConfigError("waypoints", f"must have shape (m, 2) with m >= 2, got shape {pts.shape}")
            if not np.all(np.isfinite(pts)):
                raise ConfigError("waypoints", "has non-finite coordinates")
            put("waypoints", pts)

    def process_model(self) -> SingleIntegrator:
        return SingleIntegrator()

    def observation_model(self) -> ObservationModel:
        return ObservationModel(self.observation, self.landmarks, self.combine)


# Setup shared by all benchmark presets: horizon 7, zero control-effort weight,
# control norms capped at 0.8, a 0.1-radius goal ball at (-1, 2.25), start
# estimate (-1.5, -0.5), and a three-segment seed polyline.
_COMMON = dict(
    process="single_integrator",
    combine=CombineMode.STACKED,
    x0_hat=(-1.5, -0.5),
    goal=(-1.0, 2.25),
    goal_radius=0.1,
    control_bound=0.8,
    horizon=7,
    control_weight=np.zeros((2, 2)),
    waypoints=((-1.5, -0.5), (-1.4, 0.21), (-1.1, 1.369), (-1.0, 2.25)),
)

_PRESETS: dict[str, dict[str, Any]] = {
    "A": dict(
        observation=ObservationKind.RANGE_SQUARED,
        landmarks=((0.2, 0.0), (0.5, 0.3), (2.0, 1.0)),
        sigma_x0=((0.025, 0.002), (0.002, 0.025)),
        sigma_w=((0.3, 0.0), (0.0, 0.1)),
        sigma_nu=0.1,
    ),
    "B": dict(
        observation=ObservationKind.RANGE,
        landmarks=((0.2, 0.0), (0.6, 0.3)),
        sigma_x0=((0.25, 0.0), (0.0, 0.25)),
        sigma_w=((0.1, 0.0), (0.0, 1.0)),
        sigma_nu=0.015,
    ),
    "C": dict(
        observation=ObservationKind.RANGE,
        landmarks=((0.0, 1.0), (0.5, 0.5), (0.1, 1.4)),
        sigma_x0=((0.02, 0.0), (0.0, 0.02)),
        sigma_w=((0.1, 0.0), (0.0, 0.1)),
        sigma_nu=0.0001,
    ),
}


def preset(name: str) -> ScenarioConfig:
    """One of the three benchmark scenarios A, B or C."""
    key = name.upper()
    if key not in _PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose one of {sorted(_PRESETS)}")
    return ScenarioConfig(name=key, **_COMMON, **_PRESETS[key])


def config_to_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    """Plain-JSON representation; inverse of config_from_dict."""
    return {
        "name": cfg.name,
        "process": cfg.process,
        "observation": cfg.observation.value,
        "combine": cfg.combine.value,
        "landmarks": cfg.landmarks.tolist(),
        "sigma_x0": cfg.sigma_x0.tolist(),
        "sigma_w": cfg.sigma_w.tolist(),
        "sigma_nu": cfg.sigma_nu if np.isscalar(cfg.sigma_nu) else np.asarray(cfg.sigma_nu).tolist(),
        "x0_hat": cfg.x0_hat.tolist(),
        "goal": cfg.goal.tolist(),
        "goal_radius": cfg.goal_radius,
        "control_bound": cfg.control_bound,
        "horizon": cfg.horizon,
        "control_weight": cfg.control_weight.tolist(),
        "waypoints": cfg.waypoints.tolist(),
    }


def config_from_dict(data: dict[str, Any]) -> ScenarioConfig:
    """Build and validate a scenario from parsed JSON."""
    if not isinstance(data, dict):
        raise ConfigError("(root)", "scenario file must contain a JSON object")
    known = {f.name for f in fields(ScenarioConfig)}
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown field")
    return ScenarioConfig(**data)


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a scenario JSON file; raises ConfigError with the offending field."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("(file)", f"not valid JSON: {exc}") from None
    return config_from_dict(data)
