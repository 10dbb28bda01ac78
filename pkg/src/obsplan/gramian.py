"""Observability Gramian, its noise-weighted Fisher variant, and scalar measures.

The Gramian accumulated along a nominal trajectory is

    Q = sum_t Phi_t^T H_t^T H_t Phi_t,

with Phi_t the running product of state Jacobians (identity at the first
included step). The Fisher variant weights each term by the inverse
observation-noise covariance; for isotropic noise sigma * I it equals Q / sigma.

Scalar measures turn the matrix into a planning objective. Degenerate (rank
deficient) Gramians map to a large finite sentinel instead of dividing by an
eigenvalue that is zero to tolerance, which keeps objectives usable from
degenerate initializations.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt

from .core import FloatArray, LinearizationSequence, mat_inverse, symmetrize
from .models import observation_noise

# Objective value reported for measures that are undefined on a rank-deficient
# matrix; large but finite so optimizers can still rank iterates.
DEGENERATE_SENTINEL = 1e12

# Eigenvalues below this fraction of max(1, largest eigenvalue) count as zero.
EIGEN_FLOOR = 1e-12


class GramianKind(Enum):
    OG = "og"
    SFIM = "sfim"


class MeasureKind(Enum):
    """Scalar objectives derived from the accumulated information matrix."""

    DET_INVERSE = "det_inverse"
    LOG_DET_INVERSE = "log_det_inverse"
    TRACE_INVERSE = "trace_inverse"
    NEG_TRACE = "neg_trace"
    INV_MIN_EIG = "inv_min_eig"
    INV_MAX_EIG = "inv_max_eig"
    CONDITION_NUMBER = "condition_number"


@dataclass(frozen=True)
class GramianResult:
    """Accumulated information matrix over a horizon, symmetric PSD."""

    matrix: FloatArray
    horizon: int
    kind: GramianKind


def _accumulate(
    lin: LinearizationSequence,
    weight: FloatArray | None,
    include_initial: bool,
) -> FloatArray:
    first = 0 if include_initial else 1
    phi = np.eye(lin.n_x)
    acc = np.zeros((lin.n_x, lin.n_x))
    for t in range(first, lin.horizon + 1):
        if t > first:
            phi = lin.A[t - 1] @ phi
        h_phi = lin.H[t] @ phi
        if weight is None:
            acc += h_phi.T @ h_phi
        else:
            acc += h_phi.T @ weight @ h_phi
    return symmetrize(acc)


def observability_gramian(lin: LinearizationSequence, include_initial: bool = True) -> GramianResult:
    """Unweighted Gramian along the trajectory; includes the t = 0 term by default."""
    return GramianResult(
        matrix=_accumulate(lin, None, include_initial),
        horizon=lin.horizon,
        kind=GramianKind.OG,
    )


def sfim(
    lin: LinearizationSequence,
    sigma_nu: float | npt.ArrayLike,
    include_initial: bool = True,
) -> GramianResult:
    """Fisher information of the measurements, weighted by inverse noise covariance."""
    noise = observation_noise(sigma_nu, lin.n_z)
    weight = mat_inverse(noise, name="observation noise covariance")
    return GramianResult(
        matrix=_accumulate(lin, weight, include_initial),
        horizon=lin.horizon,
        kind=GramianKind.SFIM,
    )


def gramian_measure_info(g: GramianResult, kind: MeasureKind) -> tuple[float, bool]:
    """Evaluate a scalar measure; the flag reports sentinel (degeneracy) use.

    All measures are computed from the symmetric eigen-decomposition.
    """
    eigs = np.linalg.eigvalsh(symmetrize(g.matrix))
    lam_min = float(eigs[0])
    lam_max = float(eigs[-1])
    floor = EIGEN_FLOOR * max(1.0, lam_max)

    if kind is MeasureKind.NEG_TRACE:
        return -float(np.sum(eigs)), False
    if kind is MeasureKind.INV_MAX_EIG:
        if lam_max < floor:
            return DEGENERATE_SENTINEL, True
        return 1.0 / lam_max, False
    if lam_min < floor:
        return DEGENERATE_SENTINEL, True
    if kind is MeasureKind.DET_INVERSE:
        return 1.0 / float(np.prod(eigs)), False
    if kind is MeasureKind.LOG_DET_INVERSE:
        return -float(np.sum(np.log(eigs))), False
    if kind is MeasureKind.TRACE_INVERSE:
        return float(np.sum(1.0 / eigs)), False
    if kind is MeasureKind.INV_MIN_EIG:
        return 1.0 / lam_min, False
    if kind is MeasureKind.CONDITION_NUMBER:
        return lam_max / lam_min, False
    raise ValueError(f"unknown measure kind {kind!r}")


def gramian_measure(g: GramianResult, kind: MeasureKind) -> float:
    """Scalar measure value; DEGENERATE_SENTINEL on rank-deficient input."""
    value, _ = gramian_measure_info(g, kind)
    return value
