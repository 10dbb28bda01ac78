"""Deterministic covariance propagation along a nominal trajectory.

Once the nominal trajectory is fixed, the Kalman-filter covariance evolves
deterministically through the predict/update recursion

    P-_t = A_{t-1} P+_{t-1} A_{t-1}^T + G_{t-1} Sw G_{t-1}^T
    S_t  = H_t P-_t H_t^T + M_t Sv M_t^T
    P+_t = (I - P-_t H_t^T S_t^{-1} H_t) P-_t,    P+_0 = Sx0,

with measurements arriving at t = 1..K. The module also provides the
closed-form one-step posterior traces for the single-origin-landmark range and
half-squared-range sensors, used as independent oracles for the recursion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .core import (
    FloatArray,
    LinearizationSequence,
    SingularMatrixError,
    ascending_sum,
    symmetrize,
)
from .models import MIN_RANGE, ObservationKind, observation_noise


@dataclass(frozen=True)
class CovarianceTrace:
    """Posterior covariances P+_0..P+_K, their traces, and the planning sum.

    ``cumulative`` is the trace total over t = 1..K; the prior at t = 0 is
    excluded because it does not depend on the controls.
    """

    posteriors: FloatArray  # (K+1, n_x, n_x)
    traces: FloatArray  # (K+1,)
    cumulative: float


def predict(
    p_plus: npt.ArrayLike,
    a: npt.ArrayLike,
    g: npt.ArrayLike,
    sigma_w: npt.ArrayLike,
) -> FloatArray:
    """Time update: A P+ A^T + G Sw G^T, symmetrized."""
    p_plus = np.asarray(p_plus, dtype=float)
    a = np.asarray(a, dtype=float)
    g = np.asarray(g, dtype=float)
    sigma_w = np.asarray(sigma_w, dtype=float)
    return symmetrize(a @ p_plus @ a.T + g @ sigma_w @ g.T)


def update(
    p_minus: npt.ArrayLike,
    h: npt.ArrayLike,
    m: npt.ArrayLike,
    sigma_nu: npt.ArrayLike,
) -> tuple[FloatArray, FloatArray]:
    """Measurement update; returns the innovation covariance S and P+.

    The quadratic correction is applied through a Cholesky factor of S, which
    both exploits symmetry and detects a singular innovation covariance.
    """
    p_minus = np.asarray(p_minus, dtype=float)
    h = np.atleast_2d(np.asarray(h, dtype=float))
    m = np.atleast_2d(np.asarray(m, dtype=float))
    sigma_nu = np.atleast_2d(np.asarray(sigma_nu, dtype=float))

    s = symmetrize(h @ p_minus @ h.T + m @ sigma_nu @ m.T)
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("innovation covariance is singular; check the noise model") from exc
    # P+ = P- - C^T S^{-1} C with C = H P-; S^{-1} via the factor keeps symmetry.
    c = h @ p_minus
    y = np.linalg.solve(chol, c)
    p_plus = symmetrize(p_minus - y.T @ y)
    return s, p_plus


def propagate(
    lin: LinearizationSequence,
    sigma_w: npt.ArrayLike,
    sigma_nu: float | npt.ArrayLike,
    p0: npt.ArrayLike,
) -> CovarianceTrace:
    """Run the full predict/update recursion for t = 1..K from P+_0 = p0."""
    horizon = lin.horizon
    if horizon < 1:
        raise ValueError("propagation needs a horizon of at least one step")
    sigma_w = np.asarray(sigma_w, dtype=float)
    noise = observation_noise(sigma_nu, lin.n_z)

    p = symmetrize(np.asarray(p0, dtype=float))
    posteriors = np.empty((horizon + 1,) + p.shape)
    traces = np.empty(horizon + 1)
    posteriors[0] = p
    traces[0] = np.trace(p)
    for t in range(1, horizon + 1):
        p_minus = predict(p, lin.A[t - 1], lin.G[t - 1], sigma_w)
        _, p = update(p_minus, lin.H[t], lin.M[t], noise)
        posteriors[t] = p
        traces[t] = np.trace(p)
    return CovarianceTrace(
        posteriors=posteriors,
        traces=traces,
        cumulative=ascending_sum(traces[1:]),
    )


def analytic_one_step_trace(
    kind: ObservationKind,
    x1: npt.ArrayLike,
    sx0: float,
    sy0: float,
    swx: float,
    swy: float,
    snu: float,
) -> float:
    """Closed-form trace of P+_1 for a single landmark at the origin.

    Valid for diagonal initial and process covariances, diag(sx0, sy0) and
    diag(swx, swy), with x1 the nominal state the first update linearizes
    about. With a = sx0 + swx and b = sy0 + swy:

        range:          (a b           + (a + b) snu) / (a x^2/r^2 + b y^2/r^2 + snu)
        half r squared: (a b r^2       + (a + b) snu) / (a x^2     + b y^2     + snu)
    """
    x, y = float(np.asarray(x1, dtype=float)[0]), float(np.asarray(x1, dtype=float)[1])
    a = sx0 + swx
    b = sy0 + swy
    r2 = x * x + y * y
    if r2 < MIN_RANGE**2:
        raise ValueError("one-step trace is undefined at the origin landmark itself")
    if kind is ObservationKind.RANGE:
        return (a * b + (a + b) * snu) / (a * (x * x / r2) + b * (y * y / r2) + snu)
    if kind is ObservationKind.RANGE_SQUARED:
        return (a * b * r2 + (a + b) * snu) / (a * x * x + b * y * y + snu)
    raise ValueError(f"unknown observation kind {kind!r}")
