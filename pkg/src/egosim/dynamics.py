"""Planar bicycle model with linear tires, integrated by forward Euler.

States live in two frames: position and heading in the world frame,
velocities in the body frame. Tire forces are linear in slip angle with
no saturation, which is adequate for the low lateral accelerations the
supervisory scenarios produce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Floor applied to vx when computing slip angles, m/s. Keeps the slip
# geometry defined through standstill.
V_EPS = 0.1

# Actuator envelope shared with the control layer.
STEER_LIMIT = 0.5  # rad, road-wheel angle
ACCEL_MIN = -8.0   # m/s^2, full braking
ACCEL_MAX = 2.0    # m/s^2


@dataclass(frozen=True)
class VehicleParams:
    """Mass, geometry and tire stiffness of the EGO vehicle.

    Defaults describe a mid-size sedan.
    """

    mass: float = 1470.0                       # kg
    yaw_inertia: float = 1900.0                # kg m^2
    dist_front_axle: float = 1.04              # m, CG to front axle
    dist_rear_axle: float = 1.56               # m, CG to rear axle
    cornering_stiffness_front: float = 71000.0  # N/rad
    cornering_stiffness_rear: float = 47000.0   # N/rad

    def __post_init__(self) -> None:
        for name in (
            "mass",
            "yaw_inertia",
            "dist_front_axle",
            "dist_rear_axle",
            "cornering_stiffness_front",
            "cornering_stiffness_rear",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")


@dataclass(frozen=True)
class VehicleState:
    """Pose in the world frame, velocities in the body frame."""

    x_world: float       # m
    y_world: float       # m
    yaw: float           # rad
    vx_body: float       # m/s, longitudinal, never negative
    vy_body: float       # m/s, lateral
    yaw_rate: float      # rad/s

    def __post_init__(self) -> None:
        for name in ("x_world", "y_world", "yaw", "vx_body", "vy_body", "yaw_rate"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.vx_body < 0.0:
            raise ValueError(f"vx_body must be >= 0, got {self.vx_body!r}")


@dataclass(frozen=True)
class ControlCommand:
    """Road-wheel angle and longitudinal acceleration request."""

    steer: float   # rad
    accel: float   # m/s^2

    def __post_init__(self) -> None:
        if not (math.isfinite(self.steer) and math.isfinite(self.accel)):
            raise ValueError("command fields must be finite")
        if abs(self.steer) > STEER_LIMIT:
            raise ValueError(f"|steer| exceeds {STEER_LIMIT} rad: {self.steer!r}")
        if not (ACCEL_MIN <= self.accel <= ACCEL_MAX):
            raise ValueError(
                f"accel outside [{ACCEL_MIN}, {ACCEL_MAX}] m/s^2: {self.accel!r}"
            )


@dataclass(frozen=True)
class StateDerivative:
    dx_world: float
    dy_world: float
    dyaw: float
    dvx: float
    dvy: float
    dyaw_rate: float


def slip_angles(state: VehicleState, steer: float, params: VehicleParams) -> tuple[float, float]:
    """Front and rear tire slip angles, rad.

    The longitudinal speed is floored at V_EPS so the expressions stay
    defined when the vehicle is (nearly) stopped.
    """
    vx = max(state.vx_body, V_EPS)
    front = steer - math.atan((state.vy_body + state.yaw_rate * params.dist_front_axle) / vx)
    rear = -math.atan((state.vy_body - state.yaw_rate * params.dist_rear_axle) / vx)
    return front, rear


def tire_forces(alpha_front: float, alpha_rear: float, params: VehicleParams) -> tuple[float, float]:
    """Lateral tire forces, N. Linear in slip angle, no saturation."""
    return (
        params.cornering_stiffness_front * alpha_front,
        params.cornering_stiffness_rear * alpha_rear,
    )


def derivatives(state: VehicleState, command: ControlCommand, params: VehicleParams) -> StateDerivative:
    """Time derivative of the full state under the given command."""
    alpha_f, alpha_r = slip_angles(state, command.steer, params)
    force_front, force_rear = tire_forces(alpha_f, alpha_r, params)

    dvx = command.accel
    dvy = (force_front * math.cos(command.steer) + force_rear) / params.mass \
        - state.yaw_rate * state.vx_body
    dyaw_rate = (
        params.dist_front_axle * force_front - params.dist_rear_axle * force_rear
    ) / params.yaw_inertia

    cos_yaw = math.cos(state.yaw)
    sin_yaw = math.sin(state.yaw)
    dx = state.vx_body * cos_yaw - state.vy_body * sin_yaw
    dy = state.vx_body * sin_yaw + state.vy_body * cos_yaw

    return StateDerivative(dx, dy, state.yaw_rate, dvx, dvy, dyaw_rate)


def step_euler(
    state: VehicleState,
    command: ControlCommand,
    dt: float,
    params: VehicleParams,
) -> VehicleState:
    """One forward-Euler step of length dt seconds.

    vx is clamped at zero after the update: braking commands hold the
    vehicle at rest instead of driving it backwards.
    """
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be finite and positive, got {dt!r}")
    d = derivatives(state, command, params)
    return VehicleState(
        x_world=state.x_world + dt * d.dx_world,
        y_world=state.y_world + dt * d.dy_world,
        yaw=state.yaw + dt * d.dyaw,
        vx_body=max(0.0, state.vx_body + dt * d.dvx),
        vy_body=state.vy_body + dt * d.dvy,
        yaw_rate=state.yaw_rate + dt * d.dyaw_rate,
    )
