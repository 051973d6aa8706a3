"""Bicycle model unit tests.

Reference numbers were computed by hand from the model equations at
pinned operating points (independent evaluation, frozen here); the
remaining tests check structural invariants.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egosim.dynamics import (
    ACCEL_MAX,
    ACCEL_MIN,
    STEER_LIMIT,
    ControlCommand,
    StateDerivative,
    VehicleParams,
    VehicleState,
    derivatives,
    slip_angles,
    step_euler,
    tire_forces,
)

PARAMS = VehicleParams()

# Operating point used for the frozen reference values below.
PINNED = VehicleState(
    x_world=0.0, y_world=0.0, yaw=0.1, vx_body=8.0, vy_body=0.3, yaw_rate=0.2
)
PINNED_CMD = ControlCommand(steer=0.05, accel=1.0)


def test_default_params_are_the_sedan_set():
    assert PARAMS.mass == 1470.0
    assert PARAMS.yaw_inertia == 1900.0
    assert PARAMS.dist_front_axle == 1.04
    assert PARAMS.dist_rear_axle == 1.56
    assert PARAMS.cornering_stiffness_front == 71000.0
    assert PARAMS.cornering_stiffness_rear == 47000.0


@pytest.mark.parametrize("field_name", ["mass", "yaw_inertia", "dist_front_axle"])
def test_params_reject_nonpositive(field_name):
    with pytest.raises(ValueError):
        VehicleParams(**{field_name: 0.0})
    with pytest.raises(ValueError):
        VehicleParams(**{field_name: -1.0})


def test_state_rejects_negative_vx_and_nonfinite():
    with pytest.raises(ValueError):
        VehicleState(0.0, 0.0, 0.0, -0.1, 0.0, 0.0)
    with pytest.raises(ValueError):
        VehicleState(math.nan, 0.0, 0.0, 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        VehicleState(0.0, math.inf, 0.0, 1.0, 0.0, 0.0)


def test_command_envelope():
    ControlCommand(steer=STEER_LIMIT, accel=ACCEL_MIN)
    ControlCommand(steer=-STEER_LIMIT, accel=ACCEL_MAX)
    with pytest.raises(ValueError):
        ControlCommand(steer=STEER_LIMIT + 1e-9, accel=0.0)
    with pytest.raises(ValueError):
        ControlCommand(steer=0.0, accel=ACCEL_MIN - 1e-9)
    with pytest.raises(ValueError):
        ControlCommand(steer=0.0, accel=ACCEL_MAX + 1e-9)
    with pytest.raises(ValueError):
        ControlCommand(steer=math.nan, accel=0.0)


def test_slip_angles_at_pinned_point():
    front, rear = slip_angles(PINNED, PINNED_CMD.steer, PARAMS)
    assert front == pytest.approx(-0.013414856605273653, rel=1e-12)
    assert rear == pytest.approx(0.001499998875001527, rel=1e-12)


def test_slip_angle_speed_floor():
    # At vx = 0.02 the floor of 0.1 m/s applies.
    crawling = VehicleState(0.0, 0.0, 0.0, 0.02, 0.1, 0.05)
    front, _ = slip_angles(crawling, 0.0, PARAMS)
    assert front == pytest.approx(-0.9888912086550111, rel=1e-12)


def test_tire_forces_at_pinned_point():
    front, rear = tire_forces(-0.013414856605273653, 0.001499998875001527, PARAMS)
    assert front == pytest.approx(-952.4548189744294, rel=1e-12)
    assert rear == pytest.approx(70.49994712507177, rel=1e-12)


def test_derivatives_at_pinned_point():
    d = derivatives(PINNED, PINNED_CMD, PARAMS)
    assert d.dvx == 1.0
    assert d.dvy == pytest.approx(-2.1991595587347486, rel=1e-12)
    assert d.dyaw_rate == pytest.approx(-0.5792278574992202, rel=1e-12)
    assert d.dyaw == PINNED.yaw_rate
    assert d.dx_world == pytest.approx(7.9300832972301585, rel=1e-12)
    assert d.dy_world == pytest.approx(1.0971685827580329, rel=1e-12)


def test_derivatives_are_deterministic():
    first = derivatives(PINNED, PINNED_CMD, PARAMS)
    for _ in range(5):
        again = derivatives(PINNED, PINNED_CMD, PARAMS)
        assert again == first  # bit-identical, not approx


def test_straight_line_equilibrium_has_zero_lateral_drift():
    # 10000 steps at the target operating point: every lateral quantity
    # stays exactly zero, not merely small.
    state = VehicleState(0.0, 2.0, 0.0, 10.0, 0.0, 0.0)
    cmd = ControlCommand(steer=0.0, accel=0.0)
    for _ in range(10_000):
        state = step_euler(state, cmd, 0.01, PARAMS)
    assert state.y_world == 2.0
    assert state.vy_body == 0.0
    assert state.yaw == 0.0
    assert state.yaw_rate == 0.0
    assert state.vx_body == 10.0
    assert state.x_world == pytest.approx(1000.0, rel=1e-9)


def test_braking_clamps_vx_at_zero():
    state = VehicleState(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
    cmd = ControlCommand(steer=0.0, accel=-8.0)
    for _ in range(100):
        state = step_euler(state, cmd, 0.01, PARAMS)
        assert state.vx_body >= 0.0
    assert state.vx_body == 0.0


def test_step_euler_rejects_bad_dt():
    with pytest.raises(ValueError):
        step_euler(PINNED, PINNED_CMD, 0.0, PARAMS)
    with pytest.raises(ValueError):
        step_euler(PINNED, PINNED_CMD, -0.01, PARAMS)


def test_nonlinear_matches_linear_model_to_first_order():
    """Shrinking the perturbation by 2 must shrink the linearization error
    by about 8: atan and sin are odd, so the quadratic remainder terms
    cancel and the leading error is cubic."""
    from egosim.lateral import build_linear_model

    speed = 10.0
    model = build_linear_model(speed, PARAMS)

    def residual(eps):
        # Perturbed lateral state [Y, vy, yaw, r] and steering.
        y, vy, yaw, r = 0.0, 0.3 * eps, 0.2 * eps, 0.1 * eps
        steer = 0.25 * eps
        state = VehicleState(0.0, y, yaw, speed, vy, r)
        d = derivatives(state, ControlCommand(steer=steer, accel=0.0), PARAMS)
        nonlinear = [d.dy_world, d.dvy, d.dyaw, d.dyaw_rate]
        z = [y, vy, yaw, r]
        linear = [
            sum(model.state_matrix[i][j] * z[j] for j in range(4))
            + model.input_matrix[i][0] * steer
            for i in range(4)
        ]
        return max(abs(n - l) for n, l in zip(nonlinear, linear))

    coarse, fine = residual(1e-3), residual(5e-4)
    assert coarse < 1e-5
    assert coarse / fine == pytest.approx(8.0, rel=0.2)


@settings(max_examples=200, deadline=None)
@given(
    vx=st.floats(0.0, 30.0),
    vy=st.floats(-3.0, 3.0),
    yaw=st.floats(-math.pi, math.pi),
    r=st.floats(-1.0, 1.0),
    steer=st.floats(-STEER_LIMIT, STEER_LIMIT),
    accel=st.floats(ACCEL_MIN, ACCEL_MAX),
)
def test_step_stays_finite_and_forward(vx, vy, yaw, r, steer, accel):
    state = VehicleState(0.0, 0.0, yaw, vx, vy, r)
    nxt = step_euler(state, ControlCommand(steer=steer, accel=accel), 0.01, PARAMS)
    assert nxt.vx_body >= 0.0
    for value in (nxt.x_world, nxt.y_world, nxt.yaw, nxt.vx_body, nxt.vy_body, nxt.yaw_rate):
        assert math.isfinite(value)


def test_derivative_type_is_plain_data():
    d = derivatives(PINNED, PINNED_CMD, PARAMS)
    assert isinstance(d, StateDerivative)
