"""Dense linear-algebra helpers and trajectory containers shared by the toolkit.

Everything here is dimension-generic but tuned for the small dense problems
the planner handles (state dimensions well below ~16, horizons of a few tens
of steps). All containers are immutable values and all functions are pure, so
they are safe to use from concurrent solves without locking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]

# Inverses are refused beyond this condition estimate; the result would be noise.
MAX_INVERSE_CONDITION = 1e14

# Covariance validation tolerances: relative asymmetry and eigenvalue floor.
SYMMETRY_RTOL = 1e-9
PSD_TOL = 1e-9


class RolloutDivergenceError(RuntimeError):
    """A nominal rollout produced a non-finite state."""


class SingularMatrixError(RuntimeError):
    """A matrix is singular (or too ill-conditioned) for the requested op."""


def as_vector(x: npt.ArrayLike, length: int | None = None, name: str = "vector") -> FloatArray:
    """Coerce to a finite 1-D float vector, optionally of fixed length."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name} must have length {length}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_square_matrix(a: npt.ArrayLike, name: str = "matrix") -> FloatArray:
    """Coerce to a finite square 2-D float matrix."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def symmetrize(a: FloatArray) -> FloatArray:
    """Return (A + A^T) / 2; applied after every covariance-style product."""
    return 0.5 * (a + a.T)


def as_covariance(a: npt.ArrayLike, name: str = "covariance") -> FloatArray:
    """Validate a covariance matrix and return a symmetrized copy.

    Requires symmetry within a relative tolerance and positive semidefiniteness
    up to a small eigenvalue margin.
    """
    arr = as_square_matrix(a, name)
    scale = max(1.0, float(np.abs(arr).max()))
    if np.abs(arr - arr.T).max() > SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} is not symmetric")
    arr = symmetrize(arr)
    eigs = np.linalg.eigvalsh(arr)
    if eigs[0] < -PSD_TOL * max(1.0, eigs[-1]):
        raise ValueError(f"{name} is not positive semidefinite (min eigenvalue {eigs[0]:.3e})")
    return arr


def mat_inverse(a: npt.ArrayLike, name: str = "matrix") -> FloatArray:
    """Dense inverse with a condition-estimate guard."""
    arr = as_square_matrix(a, name)
    cond = float(np.linalg.cond(arr))
    if not np.isfinite(cond) or cond > MAX_INVERSE_CONDITION:
        raise SingularMatrixError(f"{name} is singular to tolerance (condition estimate {cond:.3e})")
    return np.linalg.inv(arr)


def sym_eigvalues(a: npt.ArrayLike) -> FloatArray:
    """Eigenvalues of a symmetric matrix, ascending."""
    return np.linalg.eigvalsh(as_square_matrix(a))


def sym_eigendecomposition(a: npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
    """Eigen-decomposition (ascending eigenvalues, orthonormal columns)."""
    return np.linalg.eigh(as_square_matrix(a))


def ascending_sum(values: npt.ArrayLike) -> float:
    """Sequential left-to-right sum; fixed order keeps accumulations reproducible."""
    acc = 0.0
    for v in np.asarray(values, dtype=float).ravel():
        acc += float(v)
    return acc


@dataclass(frozen=True)
class NominalTrajectory:
    """Noise-free state/control pair generated by a candidate control sequence.

    states has shape (K+1, n_x) with states[0] the start; controls has shape
    (K, n_u). The pair is self-consistent by construction: states[t+1] is the
    noise-free process applied to (states[t], controls[t]).
    """

    states: FloatArray
    controls: FloatArray

    def __post_init__(self) -> None:
        if self.states.ndim != 2 or self.controls.ndim != 2:
            raise ValueError("states and controls must be 2-D arrays")
        if self.states.shape[0] != self.controls.shape[0] + 1:
            raise ValueError(
                f"states length {self.states.shape[0]} must be controls length "
                f"{self.controls.shape[0]} plus one"
            )

    @property
    def horizon(self) -> int:
        return self.controls.shape[0]

    @property
    def n_x(self) -> int:
        return self.states.shape[1]

    @property
    def n_u(self) -> int:
        return self.controls.shape[1]


@dataclass(frozen=True)
class LinearizationSequence:
    """Per-step Jacobians along a nominal trajectory.

    A, B, G cover the transitions t -> t+1 for t = 0..K-1. H and M are the
    observation Jacobians evaluated at every nominal state t = 0..K; the
    covariance recursion consumes t = 1..K while the Gramian may also include
    t = 0.
    """

    A: FloatArray  # (K, n_x, n_x)
    B: FloatArray  # (K, n_x, n_u)
    G: FloatArray  # (K, n_x, n_x)
    H: FloatArray  # (K+1, n_z, n_x)
    M: FloatArray  # (K+1, n_z, n_z)

    def __post_init__(self) -> None:
        k = self.A.shape[0]
        if self.B.shape[0] != k or self.G.shape[0] != k:
            raise ValueError("A, B, G must share the horizon length")
        if self.H.shape[0] != k + 1 or self.M.shape[0] != k + 1:
            raise ValueError("H, M must have horizon-plus-one entries (t = 0..K)")
        n_x = self.A.shape[1]
        n_z = self.H.shape[1]
        if self.A.shape[2] != n_x or self.G.shape[1:] != (n_x, n_x):
            raise ValueError("A and G must be n_x by n_x")
        if self.B.shape[1] != n_x:
            raise ValueError("B must have n_x rows")
        if self.H.shape[2] != n_x or self.M.shape[1:] != (n_z, n_z):
            raise ValueError("H must be n_z by n_x and M n_z by n_z")

    @property
    def horizon(self) -> int:
        return self.A.shape[0]

    @property
    def n_x(self) -> int:
        return self.A.shape[1]

    @property
    def n_u(self) -> int:
        return self.B.shape[2]

    @property
    def n_z(self) -> int:
        return self.H.shape[1]


def rollout_nominal(process, x0: npt.ArrayLike, controls: npt.ArrayLike) -> NominalTrajectory:
    """Roll the noise-free process forward from x0 under a control sequence.

    The process object supplies ``step(x, u, w)``; the rollout applies it with
    zero noise. Raises RolloutDivergenceError naming the first step at which
    the state stops being finite.
    """
    x = as_vector(x0, length=process.n_x, name="x0")
    u_seq = np.asarray(controls, dtype=float)
    if u_seq.ndim != 2 or u_seq.shape[1] != process.n_u:
        raise ValueError(f"controls must have shape (K, {process.n_u}), got {u_seq.shape}")
    if u_seq.shape[0] < 1:
        raise ValueError("controls must contain at least one step")

    horizon = u_seq.shape[0]
    zero_noise = np.zeros(process.n_x)
    states = np.empty((horizon + 1, process.n_x))
    states[0] = x
    for t in range(horizon):
        x = process.step(x, u_seq[t], zero_noise)
        if not np.all(np.isfinite(x)):
            raise RolloutDivergenceError(f"state became non-finite at step {t + 1}")
        states[t + 1] = x
    return NominalTrajectory(states=states, controls=u_seq.copy())
