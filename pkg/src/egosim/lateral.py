"""Speed-scheduled LQR lane tracking.

The regulated state is [Y, vy, yaw, yaw_rate]: lateral position in the
world frame, body-frame lateral velocity, heading, and yaw rate, with the
road assumed straight along the world x axis. The plant is the standard
linear single-track model, which depends on the current longitudinal
speed, so the gain is recomputed whenever the speed drifts far enough
from the speed the gain was designed at.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import STEER_LIMIT, VehicleParams, VehicleState
from .riccati import RiccatiSolverError, solve_care

# Below this speed the linear model is ill-conditioned and gains are not
# recomputed; the last valid gain is held.
V_MIN = 0.5  # m/s

# Below this speed steering is forced straight.
STANDSTILL_SPEED = 0.05  # m/s


@dataclass(frozen=True)
class LinearLateralModel:
    """Continuous-time lateral dynamics linearized at one speed."""

    state_matrix: np.ndarray   # 4x4
    input_matrix: np.ndarray   # 4x1
    built_at_speed: float      # m/s


@dataclass(frozen=True)
class LqrWeights:
    """Quadratic cost weights for the tracking regulator."""

    state_cost: np.ndarray = field(
        default_factory=lambda: np.diag([0.5, 0.3, 0.0, 0.3])
    )
    input_cost: np.ndarray = field(default_factory=lambda: np.array([[5.0]]))

    def __post_init__(self) -> None:
        q = np.asarray(self.state_cost, dtype=float)
        r = np.asarray(self.input_cost, dtype=float)
        if q.shape != (4, 4) or not np.allclose(q, q.T):
            raise ValueError("state_cost must be symmetric 4x4")
        if np.any(np.linalg.eigvalsh(q) < -1e-12):
            raise ValueError("state_cost must be positive semidefinite")
        if r.shape != (1, 1) or r[0, 0] <= 0.0:
            raise ValueError("input_cost must be 1x1 and positive")
        object.__setattr__(self, "state_cost", q)
        object.__setattr__(self, "input_cost", r)


@dataclass(frozen=True)
class GainMatrix:
    """State-feedback row vector with its design speed and stability margin.

    closed_loop_margin is the largest real part over the eigenvalues of
    A - B K; it is negative for every gain this module hands out.
    """

    gains: np.ndarray          # shape (4,)
    valid_at_speed: float      # m/s
    closed_loop_margin: float


class ClosedLoopUnstableError(RuntimeError):
    """A computed gain failed the Hurwitz check on A - B K."""


def build_linear_model(speed: float, params: VehicleParams) -> LinearLateralModel:
    """Linear single-track lateral model at the given longitudinal speed."""
    if not (math.isfinite(speed) and speed >= V_MIN):
        raise ValueError(f"speed must be >= {V_MIN} m/s to linearize, got {speed!r}")
    cf = params.cornering_stiffness_front
    cr = params.cornering_stiffness_rear
    lf = params.dist_front_axle
    lr = params.dist_rear_axle
    m = params.mass
    iz = params.yaw_inertia

    a = np.array(
        [
            [0.0, 1.0, speed, 0.0],
            [
                0.0,
                -(cf + cr) / (m * speed),
                0.0,
                -(cf * lf - cr * lr) / (m * speed) - speed,
            ],
            [0.0, 0.0, 0.0, 1.0],
            [
                0.0,
                -(cf * lf - cr * lr) / (iz * speed),
                0.0,
                -(cf * lf * lf + cr * lr * lr) / (iz * speed),
            ],
        ]
    )
    b = np.array([[0.0], [cf / m], [0.0], [lf * cf / iz]])
    return LinearLateralModel(state_matrix=a, input_matrix=b, built_at_speed=speed)


def compute_gain(model: LinearLateralModel, weights: LqrWeights) -> GainMatrix:
    """LQR gain K = R^{-1} B' P for the model, with a Hurwitz check."""
    try:
        p, _ = solve_care(
            model.state_matrix,
            model.input_matrix,
            weights.state_cost,
            weights.input_cost,
        )
    except RiccatiSolverError as exc:
        raise ClosedLoopUnstableError(f"gain synthesis failed: {exc}") from exc

    k = np.linalg.solve(weights.input_cost, model.input_matrix.T @ p)
    a_cl = model.state_matrix - model.input_matrix @ k
    margin = float(np.max(np.linalg.eigvals(a_cl).real))
    if margin >= 0.0:
        raise ClosedLoopUnstableError(
            f"closed loop not Hurwitz at v={model.built_at_speed}: margin {margin:.3e}"
        )
    return GainMatrix(
        gains=k.reshape(4),
        valid_at_speed=model.built_at_speed,
        closed_loop_margin=margin,
    )


def maybe_update_gain(
    current_speed: float,
    gain: GainMatrix,
    threshold: float,
    params: VehicleParams,
    weights: LqrWeights,
) -> GainMatrix:
    """Recompute the gain when speed has drifted more than threshold m/s.

    Below V_MIN the existing gain is kept regardless of drift.
    """
    if current_speed < V_MIN:
        return gain
    if abs(current_speed - gain.valid_at_speed) <= threshold:
        return gain
    return compute_gain(build_linear_model(current_speed, params), weights)


def steering_command(gain: GainMatrix, state: VehicleState, lateral_ref: float) -> float:
    """Road-wheel angle regulating [Y, vy, yaw, yaw_rate] to [ref, 0, 0, 0].

    Saturated at the actuator limit.
    """
    error = np.array(
        [
            state.y_world - lateral_ref,
            state.vy_body,
            state.yaw,
            state.yaw_rate,
        ]
    )
    raw = -float(gain.gains @ error)
    return max(-STEER_LIMIT, min(STEER_LIMIT, raw))
