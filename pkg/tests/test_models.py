import numpy as np
import pytest

from obsplan.core import rollout_nominal
from obsplan.models import (
    CombineMode,
    JacobianSingularityError,
    ObservationKind,
    ObservationModel,
    SingleIntegrator,
    linearize_trajectory,
    observation_noise,
)

PROCESS = SingleIntegrator()
SCENARIO_A_LANDMARKS = [[0.2, 0.0], [0.5, 0.3], [2.0, 1.0]]


def fd_jacobian(func, x, h=1e-6):
    """Central-difference Jacobian, the independent oracle for analytic rows."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        cols.append((func(x + step) - func(x - step)) / (2.0 * h))
    return np.stack(cols, axis=1)


def test_process_step_is_additive():
    assert PROCESS.step([1.0, 2.0], [0.5, -1.0], [0.0, 0.0]).tolist() == [1.5, 1.0]
    x = np.array([0.4, -0.7])
    assert np.array_equal(PROCESS.step(x, np.zeros(2), np.zeros(2)), x)
    assert PROCESS.step([0.0, 0.0], [0.8, 0.0], [0.1, -0.1]).tolist() == pytest.approx([0.9, -0.1])


def test_process_jacobians_identity_everywhere():
    a1, b1, g1 = PROCESS.jacobians([0.0, 0.0], [0.0, 0.0])
    a2, b2, g2 = PROCESS.jacobians([3.0, -2.0], [0.5, 0.5])
    for mat in (a1, b1, g1, a2, b2, g2):
        assert np.array_equal(mat, np.eye(2))
    # transition product over any horizon stays the identity
    product = np.eye(2)
    for _ in range(7):
        product = a1 @ product
    assert np.array_equal(product, np.eye(2))


def test_observe_range_and_squared():
    range_model = ObservationModel(ObservationKind.RANGE, [[0.0, 0.0]])
    assert range_model.measure([3.0, 4.0]) == pytest.approx([5.0])
    squared = ObservationModel(ObservationKind.RANGE_SQUARED, [[0.0, 0.0]])
    assert squared.measure([3.0, 4.0]) == pytest.approx([12.5])
    stacked = ObservationModel(ObservationKind.RANGE, [[0.0, 0.0], [1.0, 0.0]])
    assert stacked.measure([1.0, 1.0]) == pytest.approx([np.sqrt(2.0), 1.0])


def test_observe_zero_range_is_valid():
    model = ObservationModel(ObservationKind.RANGE, [[1.0, 1.0]])
    assert model.measure([1.0, 1.0]) == pytest.approx([0.0])


def test_jacobian_examples():
    range_model = ObservationModel(ObservationKind.RANGE, [[0.0, 0.0]])
    assert range_model.jacobian([3.0, 4.0]) == pytest.approx(np.array([[0.6, 0.8]]))
    squared = ObservationModel(ObservationKind.RANGE_SQUARED, [[0.0, 0.0]])
    assert squared.jacobian([3.0, 4.0]) == pytest.approx(np.array([[3.0, 4.0]]))


@pytest.mark.parametrize("kind", [ObservationKind.RANGE, ObservationKind.RANGE_SQUARED])
def test_jacobian_matches_finite_differences_at_probe_point(kind):
    model = ObservationModel(kind, SCENARIO_A_LANDMARKS)
    x = np.array([-1.2, 0.7])
    assert np.abs(model.jacobian(x) - fd_jacobian(model.measure, x)).max() <= 1e-6


@pytest.mark.parametrize("kind", [ObservationKind.RANGE, ObservationKind.RANGE_SQUARED])
def test_jacobian_matches_finite_differences_randomized(kind):
    model = ObservationModel(kind, SCENARIO_A_LANDMARKS)
    marks = np.asarray(SCENARIO_A_LANDMARKS)
    rng = np.random.default_rng(17)
    checked = 0
    while checked < 100:
        x = rng.uniform(-3.0, 3.0, size=2)
        if np.linalg.norm(x[None, :] - marks, axis=1).min() < 0.05:
            continue
        assert np.abs(model.jacobian(x) - fd_jacobian(model.measure, x)).max() <= 1e-5
        checked += 1


def test_range_rows_unit_norm_and_squared_rows_exact():
    range_model = ObservationModel(ObservationKind.RANGE, SCENARIO_A_LANDMARKS)
    squared = ObservationModel(ObservationKind.RANGE_SQUARED, SCENARIO_A_LANDMARKS)
    marks = np.asarray(SCENARIO_A_LANDMARKS)
    rng = np.random.default_rng(23)
    for _ in range(50):
        x = rng.uniform(-3.0, 3.0, size=2)
        if np.linalg.norm(x[None, :] - marks, axis=1).min() < 0.05:
            continue
        rows = range_model.jacobian(x)
        assert np.abs(np.linalg.norm(rows, axis=1) - 1.0).max() <= 1e-12
        assert np.array_equal(squared.jacobian(x), x[None, :] - marks)


def test_range_jacobian_singularity_names_landmark():
    model = ObservationModel(ObservationKind.RANGE, [[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(JacobianSingularityError, match="landmark 1"):
        model.jacobian([1.0, 1.0])


def test_nearest_combine_selects_closest():
    model = ObservationModel(ObservationKind.RANGE, [[0.0, 0.0], [1.0, 0.0]], CombineMode.NEAREST)
    assert model.n_z == 1
    assert model.measure([0.9, 0.0]) == pytest.approx([0.1])
    assert model.jacobian([0.9, 0.0]) == pytest.approx(np.array([[-1.0, 0.0]]))


def test_landmark_validation():
    with pytest.raises(ValueError, match="coincide"):
        ObservationModel(ObservationKind.RANGE, [[0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ValueError, match="shape"):
        ObservationModel(ObservationKind.RANGE, np.zeros((0, 2)))


def test_linearize_trajectory_shapes_and_content():
    model = ObservationModel(ObservationKind.RANGE, SCENARIO_A_LANDMARKS)
    rng = np.random.default_rng(2)
    controls = rng.uniform(-0.5, 0.5, size=(7, 2))
    traj = rollout_nominal(PROCESS, [-1.5, -0.5], controls)
    lin = linearize_trajectory(PROCESS, model, traj)
    assert lin.A.shape == (7, 2, 2) and lin.B.shape == (7, 2, 2) and lin.G.shape == (7, 2, 2)
    assert lin.H.shape == (8, 3, 2) and lin.M.shape == (8, 3, 3)
    assert np.array_equal(lin.A, np.broadcast_to(np.eye(2), (7, 2, 2)))
    assert np.array_equal(lin.M[0], np.eye(3))
    for t in range(8):
        assert np.array_equal(lin.H[t], model.jacobian(traj.states[t]))


def test_linearize_constant_state_gives_equal_jacobians():
    model = ObservationModel(ObservationKind.RANGE_SQUARED, [[0.0, 0.0]])
    traj = rollout_nominal(PROCESS, [0.7, -0.4], np.zeros((4, 2)))
    lin = linearize_trajectory(PROCESS, model, traj)
    for t in range(1, 5):
        assert np.array_equal(lin.H[t], lin.H[0])


def test_observation_noise_normalization():
    assert np.array_equal(observation_noise(0.1, 3), 0.1 * np.eye(3))
    full = np.diag([0.1, 0.2])
    assert np.array_equal(observation_noise(full, 2), full)
    with pytest.raises(ValueError, match="positive"):
        observation_noise(-1.0, 2)
    with pytest.raises(ValueError, match="scalar or"):
        observation_noise(np.eye(3), 2)
