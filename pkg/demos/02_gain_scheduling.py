"""How the lateral controller schedules its gains with speed.

Solves the Riccati equation across the demo speed range and tabulates
the resulting feedback rows. The position gain is pinned at sqrt(q_y/r)
by the problem structure, so it shows up constant; the damping terms
are what actually move. Also demonstrates the update rule: gains are
reused until the speed leaves a half-meter-per-second window.
"""

from __future__ import annotations

from egosim import (
    LqrWeights,
    VehicleParams,
    build_linear_model,
    compute_gain,
    maybe_update_gain,
)

SPEEDS = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 15.0]


def main() -> None:
    params = VehicleParams()
    weights = LqrWeights()

    print(f"{'speed':>6} {'k_y':>9} {'k_vy':>9} {'k_yaw':>9} {'k_rate':>9} {'margin':>8}")
    for speed in SPEEDS:
        gain = compute_gain(build_linear_model(speed, params), weights)
        k = gain.gains
        print(
            f"{speed:6.1f} {k[0]:9.5f} {k[1]:9.5f} {k[2]:9.5f} {k[3]:9.5f} "
            f"{gain.closed_loop_margin:8.4f}"
        )

    print()
    gain = compute_gain(build_linear_model(10.0, params), weights)
    for probe in (10.2, 10.49, 10.51, 6.0):
        updated = maybe_update_gain(probe, gain, 0.5, params, weights)
        verdict = "kept" if updated is gain else f"recomputed at {updated.valid_at_speed:.2f}"
        print(f"  speed {probe:5.2f} m/s with gain from 10.00: {verdict}")


if __name__ == "__main__":
    main()
