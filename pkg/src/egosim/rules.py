"""Supervisory requirements for jaywalking pedestrians.

Seven numbered requirements map a pedestrian situation (predicted crossing
phase plus the current braking-distance band) to a longitudinal
acceleration and a lateral nudge request:

    1  crossed the road            -> maintain speed
    2  close to crossing, soft     -> -2 m/s^2, nudge away
    3  close to crossing, medium   -> -4 m/s^2, nudge away
    4  middle of road, soft        -> -4 m/s^2
    5  middle of road, medium      -> -6 m/s^2
    6  on the road, hard           -> -8 m/s^2
    7  none on path, below target  -> +2 m/s^2, recentre
       or currently nudged

Higher-numbered braking requirements take precedence when several match
one pedestrian. Across pedestrians, the most cautious decision wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .dynamics import V_EPS, VehicleState


class CrossingPhase(Enum):
    """Where the pedestrian is predicted to be when the EGO reaches them."""

    CROSSED = "crossed"
    CLOSE_TO_CROSSING = "close_to_crossing"
    MIDDLE_OF_ROAD = "middle_of_road"
    ON_ROAD = "on_road"
    NOT_ON_PATH = "not_on_path"


class BrakeBand(Enum):
    """Which stopping-distance band the current gap falls into."""

    HARD = "hard"
    MEDIUM = "medium"
    SOFT = "soft"
    NONE = "none"


# requirement id -> (accel m/s^2, nudge code)
REQUIREMENT_TABLE: dict[int, tuple[float, int]] = {
    1: (0.0, 0),
    2: (-2.0, 1),
    3: (-4.0, 1),
    4: (-4.0, 0),
    5: (-6.0, 0),
    6: (-8.0, 0),
    7: (2.0, 2),
}

# Phases in which a pedestrian is actually in play on the roadway. While
# any pedestrian is in one of these, requirement 7 must not win
# arbitration.
ACTIVE_PHASES = frozenset(
    {CrossingPhase.ON_ROAD, CrossingPhase.MIDDLE_OF_ROAD, CrossingPhase.CLOSE_TO_CROSSING}
)


@dataclass(frozen=True)
class Decision:
    """One requirement's demanded action.

    nudge: 0 keep lateral reference, 1 shift it away from the pedestrian's
    path, 2 return to lane centre.
    """

    requirement_id: int
    accel: float
    nudge: int

    def __post_init__(self) -> None:
        expected = REQUIREMENT_TABLE.get(self.requirement_id)
        if expected is None:
            raise ValueError(f"unknown requirement id {self.requirement_id!r}")
        if (self.accel, self.nudge) != expected:
            raise ValueError(
                f"requirement {self.requirement_id} demands {expected}, "
                f"got ({self.accel!r}, {self.nudge!r})"
            )

    @classmethod
    def for_requirement(cls, requirement_id: int) -> "Decision":
        accel, nudge = REQUIREMENT_TABLE[requirement_id]
        return cls(requirement_id=requirement_id, accel=accel, nudge=nudge)


@dataclass(frozen=True)
class RoadGeometry:
    """Straight road along world x; the crossing band in y."""

    road_y_min: float = 0.0
    road_y_max: float = 4.0
    lane_center_y: float = 2.0

    def __post_init__(self) -> None:
        if not self.road_y_min < self.lane_center_y < self.road_y_max:
            raise ValueError("lane centre must lie strictly inside the road band")

    @property
    def width(self) -> float:
        return self.road_y_max - self.road_y_min


@dataclass(frozen=True)
class BrakingProfile:
    """Deceleration magnitudes, m/s^2, strictly increasing in severity."""

    soft: float = 2.0
    medium: float = 4.0
    hard: float = 6.0
    full: float = 8.0

    def __post_init__(self) -> None:
        if not 0.0 < self.soft < self.medium < self.hard < self.full:
            raise ValueError("profile must satisfy 0 < soft < medium < hard < full")


@dataclass(frozen=True)
class PedestrianSnapshot:
    """What the rule layer needs to know about one pedestrian right now.

    Crossing proceeds from road_y_min towards road_y_max at crossing_speed;
    started is False while the pedestrian is still waiting at the kerb.
    """

    x: float
    y: float
    crossing_speed: float
    started: bool

    def __post_init__(self) -> None:
        if not (math.isfinite(self.crossing_speed) and self.crossing_speed > 0.0):
            raise ValueError("crossing_speed must be positive")


def stopping_distance(speed: float, decel: float) -> float:
    """Distance to stop from speed m/s at constant decel m/s^2."""
    if speed < 0.0:
        raise ValueError("speed must be >= 0")
    if decel <= 0.0:
        raise ValueError("decel must be > 0")
    return speed * speed / (2.0 * decel)


def classify_pedestrian(
    ego: VehicleState, ped: PedestrianSnapshot, road: RoadGeometry
) -> CrossingPhase:
    """Predicted crossing phase when the EGO reaches the pedestrian's x.

    Projects the pedestrian forward by the time the EGO needs to cover the
    longitudinal gap at its current speed, then thresholds the predicted
    fraction of road width covered. A pedestrian behind the EGO, one that
    has finished crossing, or one that has not started yet is not on the
    EGO's path.
    """
    if not ped.started or ped.y >= road.road_y_max or ped.x <= ego.x_world:
        return CrossingPhase.NOT_ON_PATH

    gap = ped.x - ego.x_world
    time_to_reach = gap / max(ego.vx_body, V_EPS)
    predicted_y = ped.y + ped.crossing_speed * time_to_reach
    fraction = (predicted_y - road.road_y_min) / road.width

    if fraction >= 1.0:
        return CrossingPhase.CROSSED
    if fraction >= 0.75:
        return CrossingPhase.CLOSE_TO_CROSSING
    if fraction >= 0.25:
        return CrossingPhase.MIDDLE_OF_ROAD
    return CrossingPhase.ON_ROAD


def braking_band(gap: float, speed: float, profile: BrakingProfile) -> BrakeBand:
    """Band of the gap relative to stopping distances at the current speed.

    Bands are half-open from above: a gap equal to the soft stopping
    distance is still inside the soft band.
    """
    if gap <= 0.0:
        raise ValueError("gap must be positive")
    if gap <= stopping_distance(speed, profile.hard):
        return BrakeBand.HARD
    if gap <= stopping_distance(speed, profile.medium):
        return BrakeBand.MEDIUM
    if gap <= stopping_distance(speed, profile.soft):
        return BrakeBand.SOFT
    return BrakeBand.NONE


def evaluate_rules(
    phase: CrossingPhase,
    gap: float | None,
    ego_speed: float,
    target_speed: float,
    has_nudged: bool,
    profile: BrakingProfile,
) -> Decision | None:
    """Single-pedestrian requirement, or None when no rule asserts.

    gap may be None only for NOT_ON_PATH. Precedence runs from the most
    severe braking requirement down, with requirement 7 applying only to
    pedestrians that are not on the path.
    """
    if phase is CrossingPhase.NOT_ON_PATH:
        if ego_speed < target_speed or has_nudged:
            return Decision.for_requirement(7)
        return None

    if phase is CrossingPhase.CROSSED:
        return Decision.for_requirement(1)

    if gap is None:
        raise ValueError(f"gap required for phase {phase}")
    band = braking_band(gap, ego_speed, profile)

    if phase is CrossingPhase.ON_ROAD and band is BrakeBand.HARD:
        return Decision.for_requirement(6)
    if phase is CrossingPhase.MIDDLE_OF_ROAD and band is BrakeBand.MEDIUM:
        return Decision.for_requirement(5)
    if phase is CrossingPhase.MIDDLE_OF_ROAD and band is BrakeBand.SOFT:
        return Decision.for_requirement(4)
    if phase is CrossingPhase.CLOSE_TO_CROSSING and band is BrakeBand.MEDIUM:
        return Decision.for_requirement(3)
    if phase is CrossingPhase.CLOSE_TO_CROSSING and band is BrakeBand.SOFT:
        return Decision.for_requirement(2)
    return None


def arbitrate(decisions: list[Decision]) -> Decision | None:
    """Most cautious decision: lowest acceleration, ties to the lower id.

    Returns None for an empty list, meaning hold current speed and keep
    the current lateral reference.
    """
    if not decisions:
        return None
    return min(decisions, key=lambda d: (d.accel, d.requirement_id))


@dataclass(frozen=True)
class Assessment:
    """One pedestrian's situation at a decision instant, plus the rule verdict."""

    phase: CrossingPhase
    gap: float | None          # m, None when not on the path
    band: BrakeBand | None     # None when no band applies
    ego_speed: float
    target_speed: float
    has_nudged: bool
    decision: Decision | None


def assess(
    ego: VehicleState,
    ped: PedestrianSnapshot,
    road: RoadGeometry,
    target_speed: float,
    has_nudged: bool,
    profile: BrakingProfile,
) -> Assessment:
    """Classify one pedestrian and evaluate the requirement table."""
    phase = classify_pedestrian(ego, ped, road)
    if phase is CrossingPhase.NOT_ON_PATH:
        gap = None
        band = None
    else:
        gap = ped.x - ego.x_world
        band = braking_band(gap, ego.vx_body, profile)
    decision = evaluate_rules(
        phase, gap, ego.vx_body, target_speed, has_nudged, profile
    )
    return Assessment(
        phase=phase,
        gap=gap,
        band=band,
        ego_speed=ego.vx_body,
        target_speed=target_speed,
        has_nudged=has_nudged,
        decision=decision,
    )
