"""Text bridge between the simulation and a decision backend.

Structured situation reports are rendered into the fixed natural-language
question format, and backend replies are parsed back into decisions. The
formats are frozen: tests pin them byte for byte, and recorded transcripts
only replay cleanly if rendering never drifts.
"""

from __future__ import annotations

import logging
import re

from dataclasses import dataclass

from .rules import Assessment, BrakeBand, CrossingPhase, Decision, REQUIREMENT_TABLE

log = logging.getLogger(__name__)

# Rendered in place of the gap when the pedestrian is not on the EGO's path.
SENTINEL_GAP = 9999.0

_BAND_WORD = {BrakeBand.SOFT: "soft", BrakeBand.MEDIUM: "medium", BrakeBand.HARD: "hard"}

_RESPONSE_RE = re.compile(
    r"^\s*[\"']?\s*Req\s*=\s*([1-7])\s*,\s*accel\s*=\s*([+-]?\d+)\s*,\s*"
    r"nudge\s*=\s*([0-2])\s*[\"']?\s*$"
)

SYSTEM_PROMPT = """\
You are an autonomous vehicle driver. The vehicle you are driving is called EGO. You need to drive subject to the following requirements:

1. If a pedestrian is jaywalking along EGO's path AND is expected to have crossed the road by the time EGO will reach them, then the EGO shall maintain speed.
2. If a pedestrian is jaywalking along EGO's path AND is expected to be close to crossing the road by the time EGO will reach them, and EGO and pedestrian are within soft braking distance, then the EGO shall apply soft braking and shall nudge away from the pedestrian.
3. If a pedestrian is jaywalking along EGO's path AND is expected to be close to crossing the road by the time EGO will reach them, and EGO and pedestrian are within medium braking distance, then the EGO shall apply hard braking and shall nudge away from the pedestrian.
4. If a pedestrian is jaywalking along EGO's path AND is expected to be in the middle of the road by the time EGO will reach them, and EGO and pedestrian are within soft braking distance, then the EGO shall apply medium braking.
5. If a pedestrian is jaywalking along EGO's path AND is expected to be in the middle of the road by the time EGO will reach them, and EGO and pedestrian are within medium braking distance, then the EGO shall apply hard braking.
6. If a pedestrian is jaywalking along EGO's path AND is expected to be on the road by the time EGO will reach them, and EGO and pedestrian are within hard braking distance, then the EGO shall apply full braking.
7. If the EGO has slowed down below the route target speed OR nudged due to a pedestrian jaywalking AND there is no pedestrian on the road, then the EGO shall accelerate smoothly to the target route speed and shall go back to center of the road.

- A requirement is met if all the AND conditions in the requirement are met.
- You need to respond with "Req=1, accel=0,nudge=0" if you encounter all the conditions for Requirement 1.
- You need to respond with "Req=2, accel=-2,nudge=1" if you encounter all the conditions for Requirement 2.
- You need to respond with "Req=3, accel=-4,nudge=1" if you encounter all the conditions for Requirement 3.
- You need to respond with "Req=4, accel=-4,nudge=0" if you encounter all the conditions for Requirement 4.
- You need to respond with "Req=5, accel=-6,nudge=0" if you encounter all the conditions for Requirement 5.
- You need to respond with "Req=6, accel=-8,nudge=0" if you encounter all the conditions for Requirement 6.
- You need to respond with "Req=7, accel=2,nudge=2" if you encounter all the conditions for Requirement 7.
- You can only respond with the text within the quotes "" but (not include the quote " symbol itself) and not come up with your answers because there is a program that parses your responses and is expecting a fixed structure.
"""


class MalformedResponse(ValueError):
    """A backend reply that does not match the required response format."""


@dataclass(frozen=True)
class SituationReport:
    """Numbers and phase statement for one pedestrian question."""

    ego_speed: float              # m/s
    longitudinal_from_x0: float   # m travelled along the road
    lateral_from_y0: float        # m, EGO lateral position
    pedestrian_name: str
    gap_to_pedestrian: float      # m, SENTINEL_GAP when not on path
    distance_to_stop_hard: float  # m
    phase_sentence: str

    def __post_init__(self) -> None:
        if self.gap_to_pedestrian != SENTINEL_GAP and self.gap_to_pedestrian <= 0.0:
            raise ValueError("gap must be positive or the sentinel")
        if not self.phase_sentence:
            raise ValueError("phase_sentence must be non-empty")


def phase_sentence(assessment: Assessment) -> str | None:
    """The fixed English statement of a pedestrian situation.

    Returns None when the situation asserts no requirement, in which case
    no question should be asked at all.
    """
    if assessment.decision is None:
        return None
    phase = assessment.phase
    if phase is CrossingPhase.NOT_ON_PATH:
        return (
            "There is not a pedestrian along the EGO's path and EGO travels "
            "with less than target speed or has nudged."
        )
    if phase is CrossingPhase.CROSSED:
        return "A pedestrian is jaywalking and is expected to have crossed the road."
    band = _BAND_WORD[assessment.band]
    if phase is CrossingPhase.CLOSE_TO_CROSSING:
        where = "close crossing the road"
    elif phase is CrossingPhase.MIDDLE_OF_ROAD:
        where = "in the middle of the road"
    else:
        where = "on the road"
    return (
        f"A pedestrian is jaywalking and is expected to be {where} and EGO "
        f"and pedestrian are within {band} braking distance."
    )


def _fmt(value: float) -> str:
    """Numbers as they appear in questions: rounded to 2 decimals, shortest repr."""
    if value == SENTINEL_GAP:
        return "9999"
    return str(round(float(value), 2))


def render_question(report: SituationReport) -> str:
    """The question string sent to a decision backend."""
    return (
        f"EGO is traveling at {_fmt(report.ego_speed)} m/s "
        f"I am {_fmt(report.longitudinal_from_x0)} m longitudinally from X0 "
        f"{_fmt(report.lateral_from_y0)} m laterally from Y0. "
        f"Distance to {report.pedestrian_name} is {_fmt(report.gap_to_pedestrian)} m "
        f"with distanceToStopHard {_fmt(report.distance_to_stop_hard)} m. "
        f"{report.phase_sentence} "
        f"What should the EGO do?"
    )


def render_system_prompt() -> str:
    return SYSTEM_PROMPT


def render_decision(decision: Decision) -> str:
    """Canonical reply string for a decision."""
    return f"Req={decision.requirement_id}, accel={decision.accel:.0f},nudge={decision.nudge}"


def parse_response(raw: str) -> Decision:
    """Parse a backend reply into a Decision.

    Tolerates surrounding whitespace, a single pair of wrapping quotes and
    flexible spacing between tokens, but the token order is fixed. The
    requirement id is authoritative: if the accel or nudge fields disagree
    with the requirement table the mismatch is logged and the table wins.
    """
    match = _RESPONSE_RE.match(raw)
    if match is None:
        raise MalformedResponse(f"unparseable backend reply: {raw!r}")
    requirement_id = int(match.group(1))
    accel = float(match.group(2))
    nudge = int(match.group(3))
    expected = REQUIREMENT_TABLE[requirement_id]
    if (accel, nudge) != expected:
        log.warning(
            "reply fields (%s, %s) disagree with requirement %d table entry %s; "
            "using the table",
            accel,
            nudge,
            requirement_id,
            expected,
        )
    return Decision.for_requirement(requirement_id)
