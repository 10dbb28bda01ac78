"""Process and observation models for the planar landmark-sensing robot.

The process model is a 2D single integrator,

    x_{t+1} = x_t + u_t + w_t,

whose state, control and noise Jacobians are all identity. Observation models
report, for each landmark l, either the range r = ||x - l|| or the half
squared range r^2 / 2. Their Jacobian rows are (x - l)^T / r and (x - l)^T
respectively; the range row is undefined on the landmark itself, so requests
closer than MIN_RANGE raise instead of clamping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import numpy.typing as npt

from .core import FloatArray, LinearizationSequence, NominalTrajectory, as_vector

# Below this range the direction to a landmark, hence the range Jacobian, is
# undefined. Planners must never place a nominal state on a landmark.
MIN_RANGE = 1e-9

# Landmarks closer than this are considered duplicates.
_LANDMARK_SEPARATION = 1e-9


class JacobianSingularityError(RuntimeError):
    """A range Jacobian was requested within MIN_RANGE of a landmark."""


class ObservationKind(Enum):
    RANGE = "range"
    RANGE_SQUARED = "range_squared"


class CombineMode(Enum):
    """How per-landmark measurements form the observation vector.

    STACKED stacks one component per landmark (n_z = landmark count). NEAREST
    keeps only the measurement of the closest landmark (n_z = 1), the literal
    scalar-observation reading.
    """

    STACKED = "stacked"
    NEAREST = "nearest"


@dataclass(frozen=True)
class SingleIntegrator:
    """Additive planar process model x_{t+1} = x_t + u_t + w_t."""

    n_x: int = field(default=2, init=False)
    n_u: int = field(default=2, init=False)

    def step(self, x: npt.ArrayLike, u: npt.ArrayLike, w: npt.ArrayLike) -> FloatArray:
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        if x.shape != (self.n_x,) or u.shape != (self.n_u,) or w.shape != (self.n_x,):
            raise ValueError(f"expected x, u, w of shapes ({self.n_x},), ({self.n_u},), ({self.n_x},)")
        return x + u + w

    def jacobians(self, x: npt.ArrayLike, u: npt.ArrayLike) -> tuple[FloatArray, FloatArray, FloatArray]:
        """State, control and noise Jacobians (A, B, G); all identity here.

        The state and control arguments are accepted so nonlinear models can
        share the interface.
        """
        eye = np.eye(self.n_x)
        return eye, eye.copy(), eye.copy()


@dataclass(frozen=True)
class ObservationModel:
    """Range or half-squared-range measurements of a fixed landmark set."""

    kind: ObservationKind
    landmarks: FloatArray
    combine: CombineMode = CombineMode.STACKED

    def __post_init__(self) -> None:
        kind = self.kind if isinstance(self.kind, ObservationKind) else ObservationKind(self.kind)
        combine = self.combine if isinstance(self.combine, CombineMode) else CombineMode(self.combine)
        marks = np.asarray(self.landmarks, dtype=float)
        if marks.ndim != 2 or marks.shape[1] != 2 or marks.shape[0] < 1:
            raise ValueError(f"landmarks must have shape (n, 2) with n >= 1, got {marks.shape}")
        if not np.all(np.isfinite(marks)):
            raise ValueError("landmarks have non-finite coordinates")
        for i in range(marks.shape[0]):
            for j in range(i + 1, marks.shape[0]):
                if np.linalg.norm(marks[i] - marks[j]) < _LANDMARK_SEPARATION:
                    raise ValueError(f"landmarks {i} and {j} coincide")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "combine", combine)
        object.__setattr__(self, "landmarks", marks)

    @property
    def n_z(self) -> int:
        return 1 if self.combine is CombineMode.NEAREST else self.landmarks.shape[0]

    def _offsets_and_ranges(self, x: FloatArray) -> tuple[FloatArray, FloatArray]:
        offsets = x[None, :] - self.landmarks
        ranges = np.linalg.norm(offsets, axis=1)
        return offsets, ranges

    def _nearest(self, ranges: FloatArray) -> int:
        # First minimum wins so ties are deterministic.
        return int(np.argmin(ranges))

    def measure(self, x: npt.ArrayLike) -> FloatArray:
        """Noise-free measurement at state x. Zero range is a valid value."""
        x = as_vector(x, length=2, name="state")
        _, ranges = self._offsets_and_ranges(x)
        values = ranges if self.kind is ObservationKind.RANGE else 0.5 * ranges**2
        if self.combine is CombineMode.NEAREST:
            idx = self._nearest(ranges)
            return values[idx : idx + 1].copy()
        return values

    def jacobian(self, x: npt.ArrayLike) -> FloatArray:
        """Measurement Jacobian at state x, one row per observation component."""
        x = as_vector(x, length=2, name="state")
        offsets, ranges = self._offsets_and_ranges(x)
        if self.combine is CombineMode.NEAREST:
            idx = self._nearest(ranges)
            offsets = offsets[idx : idx + 1]
            ranges = ranges[idx : idx + 1]
            indices = [idx]
        else:
            indices = list(range(self.landmarks.shape[0]))
        if self.kind is ObservationKind.RANGE_SQUARED:
            return offsets.copy()
        for row, i in enumerate(indices):
            if ranges[row] < MIN_RANGE:
                pos = self.landmarks[i]
                raise JacobianSingularityError(
                    f"range Jacobian undefined within {MIN_RANGE:g} of landmark {i} at ({pos[0]:g}, {pos[1]:g})"
                )
        return offsets / ranges[:, None]


def linearize_trajectory(
    process: SingleIntegrator,
    observation: ObservationModel,
    trajectory: NominalTrajectory,
) -> LinearizationSequence:
    """Evaluate all model Jacobians along a nominal trajectory.

    A, B, G are taken at (x_t, u_t, 0) for t = 0..K-1; H at every state
    t = 0..K with M the identity (additive measurement noise).
    """
    horizon = trajectory.horizon
    n_x, n_u, n_z = process.n_x, process.n_u, observation.n_z

    A = np.empty((horizon, n_x, n_x))
    B = np.empty((horizon, n_x, n_u))
    G = np.empty((horizon, n_x, n_x))
    for t in range(horizon):
        A[t], B[t], G[t] = process.jacobians(trajectory.states[t], trajectory.controls[t])

    H = np.empty((horizon + 1, n_z, n_x))
    for t in range(horizon + 1):
        H[t] = observation.jacobian(trajectory.states[t])
    M = np.broadcast_to(np.eye(n_z), (horizon + 1, n_z, n_z)).copy()
    return LinearizationSequence(A=A, B=B, G=G, H=H, M=M)


def observation_noise(sigma_nu: float | npt.ArrayLike, n_z: int) -> FloatArray:
    """Normalize a scalar variance or full matrix into an (n_z, n_z) covariance."""
    if np.isscalar(sigma_nu):
        value = float(sigma_nu)  # type: ignore[arg-type]
        if value <= 0:
            raise ValueError(f"observation noise variance must be positive, got {value:g}")
        return value * np.eye(n_z)
    mat = np.asarray(sigma_nu, dtype=float)
    if mat.shape != (n_z, n_z):
        raise ValueError(f"observation noise must be scalar or ({n_z}, {n_z}), got shape {mat.shape}")
    return mat
