"""Rule table walkthrough on a shrinking gap.

Freezes the EGO at 8 m/s while a pedestrian walks across the road ahead,
and replays the assessment at a range of longitudinal gaps. Each line
shows the predicted crossing phase, the braking band, and the command the
rule table settles on. At generous gaps the prediction says the pedestrian
will be clear before arrival (Req 1); as the gap closes the braking
requirements take over one by one. Two rows print "none": the table has
no entry for a mid-road pedestrian inside hard-braking distance, and the
walkthrough shows that hole rather than hiding it.
"""

from __future__ import annotations

from egosim import (
    BrakingProfile,
    PedestrianSnapshot,
    RoadGeometry,
    SituationReport,
    VehicleState,
    assess,
    stopping_distance,
)
from egosim.translation import phase_sentence, render_question

EGO_SPEED = 8.0
PED_Y = 0.5
PED_SPEED = 1.5


def main() -> None:
    road = RoadGeometry()
    profile = BrakingProfile()

    print(f"EGO at {EGO_SPEED} m/s, pedestrian at y={PED_Y} walking {PED_SPEED} m/s")
    print(f"{'gap':>6} {'phase':<20} {'band':<8} {'decision'}")
    for gap in (40.0, 30.0, 20.0, 16.0, 12.0, 8.0, 5.0, 3.0, 2.0):
        ego = VehicleState(
            x_world=0.0, y_world=2.0, yaw=0.0, vx_body=EGO_SPEED, vy_body=0.0, yaw_rate=0.0
        )
        ped = PedestrianSnapshot(
            x=gap, y=PED_Y, crossing_speed=PED_SPEED, started=True
        )
        a = assess(ego, ped, road, target_speed=EGO_SPEED, has_nudged=False, profile=profile)
        if a.decision is None:
            decision = "none (hold course)"
        else:
            d = a.decision
            decision = f"Req {d.requirement_id}: accel {d.accel:+.0f}, nudge {d.nudge}"
        print(f"{gap:6.1f} {a.phase.name:<20} {a.band.name:<8} {decision}")

    # One of these assessments, phrased the way the decision backends see it.
    ego = VehicleState(
        x_world=29.39, y_world=2.0, yaw=0.0, vx_body=EGO_SPEED, vy_body=0.0, yaw_rate=0.0
    )
    ped = PedestrianSnapshot(x=45.0, y=PED_Y, crossing_speed=PED_SPEED, started=True)
    a = assess(ego, ped, road, target_speed=EGO_SPEED, has_nudged=False, profile=profile)
    sentence = phase_sentence(a)
    assert sentence is not None
    report = SituationReport(
        ego_speed=ego.vx_body,
        longitudinal_from_x0=ego.x_world,
        lateral_from_y0=ego.y_world,
        pedestrian_name="Ped1",
        gap_to_pedestrian=a.gap,
        distance_to_stop_hard=stopping_distance(ego.vx_body, profile.hard),
        phase_sentence=sentence,
    )
    print()
    print("as a question:")
    print(f"  {render_question(report)}")


if __name__ == "__main__":
    main()
