"""Constrained trajectory optimization over the open-loop control sequence.

Two objective families share one solver:

  * a scalar measure of the accumulated information matrix (Gramian or its
    noise-weighted Fisher variant), plus control effort, and
  * the cumulative posterior-covariance trace from the deterministic
    predict/update recursion, plus control effort.

Constraints are the terminal goal ball ||x_K - x_g|| <= r_g and per-step
control bounds ||u_t|| <= r_u. They are handled with an augmented-Lagrangian
outer loop (squared-hinge penalties with multiplier updates) around a BFGS
inner loop driven by central finite-difference gradients. Everything is
deterministic for fixed inputs; randomized restarts are seeded.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np
import numpy.typing as npt

from .core import FloatArray, NominalTrajectory, as_covariance, rollout_nominal
from .gramian import GramianKind, MeasureKind, gramian_measure_info, observability_gramian, sfim
from .models import linearize_trajectory, observation_noise
from .riccati import propagate
from .scenarios import ScenarioConfig

# Feasibility tolerance on constraint residuals and the inner gradient target.
CONSTRAINT_TOL = 1e-4
GRADIENT_TOL = 1e-6
OUTER_CAP = 30
INNER_CAP = 400
FD_REL_STEP = 1e-6

_PENALTY_INIT = 10.0
_PENALTY_GROWTH = 2.0
_PENALTY_MAX = 1e8

# Divergence guards for objectives that are unbounded until the penalty weight
# catches up (for example maximizing summed squared ranges). The inner loop
# stops once the merit falls through the floor or the iterate leaves any
# physically meaningful region; the outer loop then discards the runaway
# iterate and raises the penalty instead of updating multipliers from it.
_DIVERGENCE_FLOOR = -1e12
_ITERATE_BOUND = 1e2
_SANE_VIOLATION = 10.0


class InfeasibleStartWarning(UserWarning):
    """A seed trajectory needs per-step controls beyond the control bound."""


@dataclass(frozen=True)
class GramianObjective:
    """Minimize a scalar measure of the accumulated information matrix."""

    measure: MeasureKind
    kind: GramianKind = GramianKind.OG


@dataclass(frozen=True)
class CovTraceObjective:
    """Minimize the cumulative posterior-covariance trace over t = 1..K."""


Objective = Union[GramianObjective, CovTraceObjective]


@dataclass(frozen=True)
class PlanProblem:
    """A scenario paired with an objective; weight and horizon default from it."""

    scenario: ScenarioConfig
    objective: Objective
    control_weight: FloatArray | None = None
    horizon: int | None = None

    def __post_init__(self) -> None:
        if self.control_weight is None:
            object.__setattr__(self, "control_weight", self.scenario.control_weight)
        else:
            object.__setattr__(
                self, "control_weight", as_covariance(self.control_weight, "control_weight")
            )
        if self.horizon is None:
            object.__setattr__(self, "horizon", self.scenario.horizon)
        elif self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    @cached_property
    def process(self):
        return self.scenario.process_model()

    @cached_property
    def observation(self):
        return self.scenario.observation_model()

    @cached_property
    def sigma_nu_matrix(self) -> FloatArray:
        return observation_noise(self.scenario.sigma_nu, self.observation.n_z)

    @cached_property
    def _weight_is_zero(self) -> bool:
        return not np.any(self.control_weight)


@dataclass(frozen=True)
class PlanResult:
    """Solver output: optimized controls plus feasibility and convergence data.

    terminal_residual and control_residual are clamped at zero, so a feasible
    plan reports zeros. ``converged`` records whether the solve met both the
    constraint tolerance and the inner gradient tolerance before its caps.
    """

    controls: FloatArray
    trajectory: NominalTrajectory
    objective_value: float
    terminal_residual: float
    control_residual: float
    iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)


def _reshape_controls(p: PlanProblem, controls: npt.ArrayLike) -> FloatArray:
    arr = np.asarray(controls, dtype=float)
    expected = (p.horizon, p.process.n_u)
    arr = arr.reshape(expected)
    if not np.all(np.isfinite(arr)):
        raise ValueError("controls have non-finite entries")
    return arr


def _objective_info(p: PlanProblem, controls: FloatArray) -> tuple[float, bool]:
    """Objective value plus whether a degenerate-Gramian sentinel was used."""
    traj = rollout_nominal(p.process, p.scenario.x0_hat, controls)
    lin = linearize_trajectory(p.process, p.observation, traj)
    degenerate = False
    if isinstance(p.objective, CovTraceObjective):
        value = propagate(lin, p.scenario.sigma_w, p.sigma_nu_matrix, p.scenario.sigma_x0).cumulative
    else:
        if p.objective.kind is GramianKind.SFIM:
            result = sfim(lin, p.sigma_nu_matrix)
        else:
            result = observability_gramian(lin)
        value, degenerate = gramian_measure_info(result, p.objective.measure)
    if not p._weight_is_zero:
        w = p.control_weight
        for t in range(controls.shape[0]):
            value += float(controls[t] @ w @ controls[t])
    return value, degenerate


def evaluate_objective(p: PlanProblem, controls: npt.ArrayLike) -> float:
    """Objective value for a control sequence (information term plus effort)."""
    value, _ = _objective_info(p, _reshape_controls(p, controls))
    return value


def evaluate_constraints(p: PlanProblem, controls: npt.ArrayLike) -> tuple[float, FloatArray]:
    """Signed constraint residuals: feasible when every value is <= 0.

    Returns (terminal, per-step control norms), where terminal is
    ||x_K - goal|| - r_g and each control entry is ||u_t|| - r_u.
    """
    u = _reshape_controls(p, controls)
    traj = rollout_nominal(p.process, p.scenario.x0_hat, u)
    terminal = float(np.linalg.norm(traj.states[-1] - p.scenario.goal)) - p.scenario.goal_radius
    control_norms = np.linalg.norm(u, axis=1) - p.scenario.control_bound
    return terminal, control_norms


def fd_gradient(func: Callable[[FloatArray], float], x: FloatArray, rel_step: float = FD_REL_STEP) -> FloatArray:
    """Central finite-difference gradient with per-coordinate step h_i = rel_step * (1 + |x_i|)."""
    grad = np.empty_like(x)
    probe = x.copy()
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        probe[i] = x[i] + h
        f_plus = func(probe)
        probe[i] = x[i] - h
        f_minus = func(probe)
        probe[i] = x[i]
        grad[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def _bfgs(
    func: Callable[[FloatArray], float],
    x0: FloatArray,
    gtol: float = GRADIENT_TOL,
    max_iter: int = INNER_CAP,
) -> tuple[FloatArray, float, float, int]:
    """Dense BFGS with Armijo backtracking; stops on gtol, stall, divergence
    (merit below the divergence floor), or the cap.

    Returns (x, f, gradient norm, iterations). Deterministic for fixed inputs.
    """
    x = x0.copy()
    f = func(x)
    g = fd_gradient(func, x)
    n = x.size
    b_inv = np.eye(n)
    scaled = False  # Shanno-Phua scaling applied at the first curvature pair
    iters = 0
    flat_steps = 0
    while iters < max_iter:
        if not np.all(np.isfinite(g)):
            break
        gnorm = float(np.linalg.norm(g))
        if gnorm <= gtol:
            break
        d = -(b_inv @ g)
        slope = float(d @ g)
        if slope >= 0.0 or not np.isfinite(slope):
            # Curvature information went bad; restart from steepest descent.
            b_inv = np.eye(n)
            scaled = False
            d = -g
            slope = -float(g @ g)
            if slope == 0.0:
                break
        # Until curvature information exists the metric is unscaled; damp the
        # step to unit length so the search stays local regardless of the
        # objective's scale.
        alpha = 1.0 if scaled else min(1.0, 1.0 / float(np.linalg.norm(d)))
        accepted = False
        for _ in range(40):
            x_new = x + alpha * d
            f_new = func(x_new)
            if np.isfinite(f_new) and f_new <= f + 1e-4 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        if f_new <= _DIVERGENCE_FLOOR or float(np.abs(x_new).max()) > _ITERATE_BOUND:
            x, f = x_new, f_new
            g = fd_gradient(func, x)
            iters += 1
            break
        # Stuck detector: repeated steps that move nowhere and improve at the
        # finite-difference noise floor cannot accumulate into progress.
        tiny_gain = f - f_new <= 1e-12 * (1.0 + abs(f))
        tiny_move = float(np.abs(x_new - x).max()) <= 1e-8 * (1.0 + float(np.abs(x).max()))
        if tiny_gain and tiny_move:
            flat_steps += 1
            if flat_steps >= 2:
                x, f = x_new, f_new
                g = fd_gradient(func, x)
                iters += 1
                break
        else:
            flat_steps = 0
        g_new = fd_gradient(func, x_new)
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            if not scaled:
                b_inv = (sy / float(y @ y)) * np.eye(n)
                scaled = True
            rho = 1.0 / sy
            v = np.eye(n) - rho * np.outer(s, y)
            b_inv = v @ b_inv @ v.T + rho * np.outer(s, s)
        x, f, g = x_new, f_new, g_new
        iters += 1
    return x, f, float(np.linalg.norm(g)), iters


def _constraint_vector(p: PlanProblem, u_flat: FloatArray) -> FloatArray:
    terminal, control_norms = evaluate_constraints(p, u_flat)
    return np.concatenate(([terminal], control_norms))


def _violation(constraints: FloatArray) -> float:
    return max(0.0, float(constraints.max()))


@dataclass
class _Best:
    """Feasible-first incumbent: lowest objective among feasible iterates,
    otherwise the least-infeasible one. Ties keep the first arrival."""

    u: FloatArray | None = None
    objective: float = np.inf
    violation: float = np.inf
    feasible: bool = False
    source: str = ""

    def offer(self, u: FloatArray, objective: float, violation: float, source: str) -> None:
        feasible = violation <= CONSTRAINT_TOL
        if self.u is None:
            better = True
        elif feasible and not self.feasible:
            better = True
        elif feasible == self.feasible:
            better = objective < self.objective if feasible else violation < self.violation
        else:
            better = False
        if better:
            self.u = u.copy()
            self.objective = objective
            self.violation = violation
            self.feasible = feasible
            self.source = source


def _solve_single(p: PlanProblem, controls0: FloatArray, label: str) -> PlanResult:
    n_u = p.process.n_u
    u = controls0.ravel().copy()
    n_constraints = p.horizon + 1
    lam = np.zeros(n_constraints)
    rho = _PENALTY_INIT

    best = _Best()
    c0 = _constraint_vector(p, u)
    best.offer(u, evaluate_objective(p, u), _violation(c0), f"{label} start")

    def merit(v: FloatArray) -> float:
        if not np.all(np.isfinite(v)):
            return np.inf  # reject runaway line-search candidates
        c = _constraint_vector(p, v)
        shifted = lam + rho * c
        penalty = float(np.sum(np.square(np.maximum(0.0, shifted)) - np.square(lam))) / (2.0 * rho)
        return evaluate_objective(p, v) + penalty

    inner_total = 0
    outer_done = 0
    converged = False
    gnorm = np.inf
    prev_u = None
    prev_viol = np.inf
    for outer in range(1, OUTER_CAP + 1):
        u, merit_val, gnorm, inner_iters = _bfgs(merit, u)
        inner_total += inner_iters
        outer_done = outer
        c = _constraint_vector(p, u)
        viol = _violation(c)
        if merit_val <= _DIVERGENCE_FLOOR or viol > _SANE_VIOLATION:
            # The subproblem was unbounded at this penalty weight; discard the
            # runaway iterate, raise the weight, and retry from solid ground.
            u = best.u.copy()
            rho = min(rho * _PENALTY_GROWTH, _PENALTY_MAX)
            prev_u = None
            continue
        best.offer(u, evaluate_objective(p, u), viol, f"{label} outer {outer}")
        if viol <= CONSTRAINT_TOL and gnorm <= GRADIENT_TOL:
            converged = True
            break
        if prev_u is not None and float(np.abs(u - prev_u).max()) <= 1e-10 * (1.0 + float(np.abs(u).max())):
            break  # iterate froze; further multiplier updates cannot move it
        lam = np.maximum(0.0, lam + rho * c)
        if viol > 0.25 * prev_viol:
            rho = min(rho * _PENALTY_GROWTH, _PENALTY_MAX)
        prev_viol = viol
        prev_u = u.copy()

    u_best = best.u.reshape(p.horizon, n_u)
    trajectory = rollout_nominal(p.process, p.scenario.x0_hat, u_best)
    terminal, control_norms = evaluate_constraints(p, u_best)
    objective_value, degenerate = _objective_info(p, u_best)
    return PlanResult(
        controls=u_best,
        trajectory=trajectory,
        objective_value=objective_value,
        terminal_residual=max(0.0, terminal),
        control_residual=max(0.0, float(control_norms.max())),
        iterations=inner_total,
        converged=converged,
        diagnostics={
            "outer_iterations": outer_done,
            "inner_iterations": inner_total,
            "gradient_norm": gnorm,
            "max_violation": best.violation,
            "source": best.source,
            "sentinel_active": degenerate,
        },
    )


def solve(
    p: PlanProblem,
    init_controls: npt.ArrayLike,
    restarts: int = 0,
    seed: int = 0,
) -> PlanResult:
    """Optimize the control sequence from a seed, optionally with restarts.

    Restarts perturb the seed with uniform noise of radius 0.1 * r_u per step
    (seeded, deterministic); the feasible-first best result wins, first arrival
    breaking ties. The result is never worse than a feasible seed because the
    seed itself stays in the candidate set.
    """
    base = _reshape_controls(p, init_controls)
    seeds = [("base", base)]
    if restarts > 0:
        rng = np.random.default_rng(seed)
        radius = 0.1 * p.scenario.control_bound
        for j in range(restarts):
            noise = rng.uniform(-1.0, 1.0, size=base.shape)
            norms = np.linalg.norm(noise, axis=1)
            over = norms > 1.0
            noise[over] /= norms[over, None]
            seeds.append((f"restart {j}", base + radius * noise))

    results = [_solve_single(p, controls, label) for label, controls in seeds]

    def key(r: PlanResult) -> tuple:
        feasible = r.terminal_residual <= CONSTRAINT_TOL and r.control_residual <= CONSTRAINT_TOL
        return (not feasible, r.objective_value if feasible else r.terminal_residual + r.control_residual)

    best = results[0]
    for r in results[1:]:
        if key(r) < key(best):
            best = r
    if restarts > 0:
        best.diagnostics["restarts"] = restarts
        best.diagnostics["seed"] = seed
    return best


def segment_allocation(waypoints: npt.ArrayLike, horizon: int) -> list[int]:
    """Steps per waypoint segment, proportional to length.

    Floors of the proportional quotas are topped up by handing the leftover
    steps to the earliest segments; every positive-length segment is then
    guaranteed at least one step by stealing from the largest allocation.
    """
    pts = np.asarray(waypoints, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("waypoints must contain at least two points")
    lengths = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    segments = lengths.size
    if horizon < segments:
        raise ValueError(f"horizon {horizon} is smaller than the {segments} waypoint segments")
    total = float(lengths.sum())
    if total == 0.0:
        return [horizon] + [0] * (segments - 1)
    alloc = np.floor(horizon * lengths / total).astype(int)
    for i in range(horizon - int(alloc.sum())):
        alloc[i] += 1
    for i in range(segments):
        if lengths[i] > 0.0 and alloc[i] == 0:
            donor = int(np.argmax(alloc))
            alloc[donor] -= 1
            alloc[i] += 1
    return alloc.tolist()


def initial_trajectory(
    waypoints: npt.ArrayLike,
    horizon: int,
    control_bound: float | None = None,
) -> FloatArray:
    """Piecewise-constant controls tracing the waypoint polyline in K steps.

    Warns (InfeasibleStartWarning) when any required per-step control exceeds
    the bound; the controls are still returned.
    """
    pts = np.asarray(waypoints, dtype=float)
    alloc = segment_allocation(pts, horizon)
    deltas = np.diff(pts, axis=0)
    controls = np.zeros((horizon, pts.shape[1]))
    row = 0
    for delta, steps in zip(deltas, alloc):
        if steps == 0:
            continue
        controls[row : row + steps] = delta / steps
        row += steps
    if control_bound is not None:
        worst = float(np.linalg.norm(controls, axis=1).max())
        if worst > control_bound + 1e-12:
            warnings.warn(
                f"seed trajectory needs per-step control norm {worst:.3g} above the bound {control_bound:g}",
                InfeasibleStartWarning,
                stacklevel=2,
            )
    return controls
