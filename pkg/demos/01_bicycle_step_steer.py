"""Open-loop feel for the bicycle model.

Drives straight for two seconds, then applies a small constant steering
angle and holds it. Prints a sparse trace of the resulting arc so the
sign conventions (left steer, positive yaw, growing Y) are visible at a
glance, and checks that the straight segment stays exactly on the lane.
"""

from __future__ import annotations

from egosim import ControlCommand, VehicleParams, VehicleState, step_euler

DT = 0.01
STEER_AT = 2.0
STEER = 0.03


def main() -> None:
    params = VehicleParams()
    state = VehicleState(
        x_world=0.0, y_world=2.0, yaw=0.0, vx_body=10.0, vy_body=0.0, yaw_rate=0.0
    )

    print(f"{'t':>5} {'x':>8} {'y':>7} {'yaw':>7} {'vy':>7} {'yaw_rate':>8}")
    for k in range(800):
        t = k * DT
        steer = STEER if t >= STEER_AT else 0.0
        if k % 100 == 0:
            print(
                f"{t:5.1f} {state.x_world:8.2f} {state.y_world:7.3f} "
                f"{state.yaw:7.4f} {state.vy_body:7.4f} {state.yaw_rate:8.4f}"
            )
        if t < STEER_AT:
            assert state.y_world == 2.0, "straight driving must not drift"
        state = step_euler(state, ControlCommand(steer=steer, accel=0.0), DT, params)

    print()
    print(f"after {STEER:.2f} rad held for {800 * DT - STEER_AT:.0f} s:")
    print(f"  lateral offset {state.y_world - 2.0:+.2f} m, heading {state.yaw:+.3f} rad")
    print("  straight segment drift: exactly zero")


if __name__ == "__main__":
    main()
