import numpy as np
import pytest

from obsplan.core import (
    RolloutDivergenceError,
    SingularMatrixError,
    as_covariance,
    ascending_sum,
    mat_inverse,
    rollout_nominal,
    sym_eigendecomposition,
    sym_eigvalues,
)
from obsplan.models import SingleIntegrator
from obsplan.planner import initial_trajectory


PROCESS = SingleIntegrator()


def test_rollout_additive_steps():
    traj = rollout_nominal(PROCESS, [0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]])
    assert traj.states.tolist() == [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]


def test_rollout_zero_controls_fixed_point():
    x0 = np.array([-1.5, -0.5])
    traj = rollout_nominal(PROCESS, x0, np.zeros((7, 2)))
    assert traj.states.shape == (8, 2)
    assert np.all(traj.states == x0)


def test_rollout_interpolates_seed_waypoints():
    waypoints = np.array([(-1.5, -0.5), (-1.4, 0.21), (-1.1, 1.369), (-1.0, 2.25)])
    controls = initial_trajectory(waypoints, 7)
    traj = rollout_nominal(PROCESS, waypoints[0], controls)
    # steps get allocated (2, 3, 2) across the three segments
    for index, point in zip((2, 5, 7), waypoints[1:]):
        assert np.linalg.norm(traj.states[index] - point) < 1e-9


def test_rollout_divergence_names_step():
    with pytest.raises(RolloutDivergenceError, match="step 2"):
        rollout_nominal(PROCESS, [0.0, 0.0], [[1.0, 1.0], [np.inf, 0.0], [0.0, 0.0]])


def test_rollout_deterministic():
    rng = np.random.default_rng(3)
    controls = rng.normal(size=(11, 2))
    a = rollout_nominal(PROCESS, [0.3, -0.2], controls)
    b = rollout_nominal(PROCESS, [0.3, -0.2], controls)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.controls, b.controls)


def test_single_integrator_endpoint_is_ascending_sum():
    rng = np.random.default_rng(11)
    for _ in range(20):
        x0 = rng.normal(size=2)
        controls = rng.normal(size=(9, 2))
        traj = rollout_nominal(PROCESS, x0, controls)
        expected = x0.copy()
        for u in controls:  # same ascending accumulation order as the rollout
            expected = expected + u
        assert np.array_equal(traj.states[-1], expected)


def test_trace_and_det_basics():
    assert np.trace(np.eye(2)) == 2.0
    assert abs(np.linalg.det(np.array([[1.0, 2.0], [2.0, 4.0]]))) < 1e-12


def test_eigvalues_by_characteristic_polynomial():
    # det([[2-l, 1], [1, 2-l]]) = l^2 - 4l + 3 = (l - 1)(l - 3)
    assert sym_eigvalues([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx([1.0, 3.0])


def test_eigendecomposition_reconstructs():
    rng = np.random.default_rng(5)
    for _ in range(25):
        n = rng.integers(2, 7)
        raw = rng.normal(size=(n, n))
        sym = 0.5 * (raw + raw.T)
        w, v = sym_eigendecomposition(sym)
        rebuilt = v @ np.diag(w) @ v.T
        rel = np.linalg.norm(rebuilt - sym) / max(1.0, np.linalg.norm(sym))
        assert rel <= 1e-9


def test_mat_inverse_and_singular():
    inv = mat_inverse([[2.0, 0.0], [0.0, 4.0]])
    assert inv == pytest.approx(np.diag([0.5, 0.25]))
    with pytest.raises(SingularMatrixError, match="condition"):
        mat_inverse([[1.0, 2.0], [2.0, 4.0]])


def test_as_covariance_accepts_and_rejects():
    out = as_covariance([[0.25, 0.0], [0.0, 0.25]])
    assert np.array_equal(out, np.diag([0.25, 0.25]))
    with pytest.raises(ValueError, match="symmetric"):
        as_covariance([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError, match="semidefinite"):
        as_covariance([[1.0, 0.0], [0.0, -0.5]])


def test_ascending_sum_matches_sequential_order():
    values = [0.1, 0.2, 0.3, 0.4]
    acc = 0.0
    for v in values:
        acc += v
    assert ascending_sum(values) == acc
