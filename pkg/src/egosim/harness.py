"""Closed-loop supervisory simulation.

One run advances the bicycle model at a fixed dt while a decision source
is consulted every decision_period seconds. At each decision instant the
harness assesses every pedestrian, renders a question for each situation
that asserts a requirement, collects the parsed decisions, and arbitrates
them into the single command held until the next instant. Between
instants the LQR lane tracker steers toward the current lateral
reference.
"""

from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, field, replace

from . import rules
from .backends import BackendError, DecisionSource, Query, TranscriptEntry, record_transcript
from .dynamics import ControlCommand, VehicleParams, VehicleState, step_euler
from .lateral import (
    GainMatrix,
    LqrWeights,
    STANDSTILL_SPEED,
    V_MIN,
    build_linear_model,
    compute_gain,
    maybe_update_gain,
    steering_command,
)
from .rules import (
    ACTIVE_PHASES,
    Assessment,
    BrakingProfile,
    Decision,
    PedestrianSnapshot,
    RoadGeometry,
    arbitrate,
    stopping_distance,
)
from .translation import (
    MalformedResponse,
    SENTINEL_GAP,
    SituationReport,
    parse_response,
    phase_sentence,
    render_question,
)

log = logging.getLogger(__name__)

# Collision box half-extents around the EGO, m.
COLLISION_HALF_LENGTH = 2.3
COLLISION_HALF_WIDTH = 0.9

# Lateral reference offset applied by a nudge, m. The shift is toward the
# road edge pedestrians enter from, which puts the EGO behind their
# crossing path.
NUDGE_OFFSET = 1.0

# Gain recompute threshold, m/s.
GAIN_SPEED_TOLERANCE = 0.5

# Distance past the farthest pedestrian at which a run ends early, m.
EXIT_MARGIN = 20.0

# Consecutive decision instants with unparseable replies before the
# harness gives up holding the previous command and brakes fully.
MAX_PARSE_FAILURES = 2
FAILSAFE_ACCEL = -8.0


@dataclass
class Pedestrian:
    """A jaywalker waiting at the kerb, then crossing at constant speed."""

    name: str
    x: float                  # m, fixed longitudinal position
    crossing_speed: float     # m/s
    start_delay: float        # s before stepping onto the road
    lateral_position: float = 0.0  # m, current y

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("pedestrian needs a name")
        if self.crossing_speed <= 0.0:
            raise ValueError("crossing_speed must be positive")
        if self.start_delay < 0.0:
            raise ValueError("start_delay must be >= 0")


@dataclass(frozen=True)
class Scenario:
    """Everything a run needs: plant, road, actors and cadence."""

    initial_state: VehicleState
    pedestrians: list[Pedestrian]
    target_speed: float = 10.0        # m/s
    decision_period: float = 0.5      # s
    dt: float = 0.01                  # s
    duration: float = 15.0            # s
    road: RoadGeometry = field(default_factory=RoadGeometry)
    params: VehicleParams = field(default_factory=VehicleParams)
    profile: BrakingProfile = field(default_factory=BrakingProfile)
    weights: LqrWeights = field(default_factory=LqrWeights)

    def __post_init__(self) -> None:
        if self.target_speed <= 0.0:
            raise ValueError("target_speed must be positive")
        if self.duration <= 0.0 or self.dt <= 0.0:
            raise ValueError("duration and dt must be positive")
        steps = self.decision_period / self.dt
        if abs(steps - round(steps)) > 1e-6 or round(steps) < 1:
            raise ValueError(
                f"decision_period {self.decision_period} must be a positive "
                f"integer multiple of dt {self.dt}"
            )
        names = [p.name for p in self.pedestrians]
        if len(set(names)) != len(names):
            raise ValueError("pedestrian names must be unique")

    @property
    def steps_per_decision(self) -> int:
        return round(self.decision_period / self.dt)


def demo_scenario(decision_period: float = 0.5) -> Scenario:
    """Two jaywalkers on a straight road, EGO at 10 m/s.

    The first pedestrian is placed a soft-braking distance plus margin
    ahead of the EGO and starts crossing after 1 s; the second waits 5 s
    at x = 65 m, which puts them mid-road exactly when the EGO gets close.
    """
    start = VehicleState(
        x_world=0.0, y_world=2.0, yaw=0.0, vx_body=10.0, vy_body=0.0, yaw_rate=0.0
    )
    profile = BrakingProfile()
    ped1_x = start.x_world + stopping_distance(10.0, profile.soft) + 20.0
    return Scenario(
        initial_state=start,
        pedestrians=[
            Pedestrian(name="Ped1", x=ped1_x, crossing_speed=1.5, start_delay=1.0),
            Pedestrian(name="Ped2", x=65.0, crossing_speed=2.0, start_delay=5.0),
        ],
        decision_period=decision_period,
        profile=profile,
    )


@dataclass(frozen=True)
class StepRecord:
    """State and command at one integration step (pre-integration)."""

    time: float
    state: VehicleState
    accel_cmd: float
    steer_cmd: float
    requirement_id: int | None
    nudge: int
    lateral_ref: float
    ped_lateral: tuple[float, ...]
    collided: bool


@dataclass(frozen=True)
class CollisionEvent:
    time: float
    pedestrian_name: str


@dataclass(frozen=True)
class DecisionRecord:
    """Arbitrated outcome at one decision instant (None means neutral)."""

    time: float
    decision: Decision | None


@dataclass
class SimLog:
    steps: list[StepRecord] = field(default_factory=list)
    decisions: list[DecisionRecord] = field(default_factory=list)
    transcript: list[TranscriptEntry] = field(default_factory=list)
    collisions: list[CollisionEvent] = field(default_factory=list)
    pedestrian_names: tuple[str, ...] = ()
    pedestrian_x: tuple[float, ...] = ()
    abort_reason: str | None = None

    @property
    def collision_occurred(self) -> bool:
        return bool(self.collisions)

    @property
    def min_speed(self) -> float:
        return min(r.state.vx_body for r in self.steps)

    @property
    def final_speed(self) -> float:
        return self.steps[-1].state.vx_body

    @property
    def min_gap(self) -> float:
        """Smallest planar EGO-to-pedestrian distance seen in the run."""
        best = math.inf
        for record in self.steps:
            for ped_x, ped_y in zip(self.pedestrian_x, record.ped_lateral):
                best = min(
                    best,
                    math.hypot(
                        ped_x - record.state.x_world, ped_y - record.state.y_world
                    ),
                )
        return best


def detect_collision(ego: VehicleState, ped_x: float, ped_y: float) -> bool:
    """True when the pedestrian is inside the EGO's collision box."""
    return (
        abs(ped_x - ego.x_world) <= COLLISION_HALF_LENGTH
        and abs(ped_y - ego.y_world) <= COLLISION_HALF_WIDTH
    )


def _snapshot(ped: Pedestrian, now: float) -> PedestrianSnapshot:
    return PedestrianSnapshot(
        x=ped.x,
        y=ped.lateral_position,
        crossing_speed=ped.crossing_speed,
        started=now >= ped.start_delay,
    )


def _build_report(
    assessment: Assessment,
    ego: VehicleState,
    name: str,
    profile: BrakingProfile,
    sentence: str,
) -> SituationReport:
    gap = SENTINEL_GAP if assessment.gap is None else assessment.gap
    return SituationReport(
        ego_speed=ego.vx_body,
        longitudinal_from_x0=ego.x_world,
        lateral_from_y0=ego.y_world,
        pedestrian_name=name,
        gap_to_pedestrian=gap,
        distance_to_stop_hard=stopping_distance(ego.vx_body, profile.hard),
        phase_sentence=sentence,
    )


def run(
    scenario: Scenario,
    source: DecisionSource,
    record_path: str | None = None,
) -> SimLog:
    """Simulate the scenario against one decision source.

    Returns the full log. Unrecoverable backend failures stop the run and
    leave abort_reason set; unparseable replies are survived by holding
    the previous command once and braking fully afterwards.
    """
    state = scenario.initial_state
    peds = copy.deepcopy(scenario.pedestrians)
    road = scenario.road
    log_out = SimLog(
        pedestrian_names=tuple(p.name for p in peds),
        pedestrian_x=tuple(p.x for p in peds),
    )

    gain: GainMatrix | None = None
    if state.vx_body >= V_MIN:
        gain = compute_gain(
            build_linear_model(state.vx_body, scenario.params), scenario.weights
        )

    lateral_ref = road.lane_center_y
    accel_cmd = 0.0
    active_requirement: int | None = None
    active_nudge = 0
    parse_failures = 0

    exit_x = max((p.x for p in peds), default=math.inf) + EXIT_MARGIN
    total_steps = round(scenario.duration / scenario.dt)
    cadence = scenario.steps_per_decision

    for k in range(total_steps):
        now = k * scenario.dt

        if k % cadence == 0:
            try:
                outcome = _decide_instant(
                    scenario, source, state, peds, now, lateral_ref, log_out
                )
            except BackendError as exc:
                log_out.abort_reason = f"{type(exc).__name__}: {exc}"
                log.error("backend failure at t=%.2f: %s", now, exc)
                break

            if outcome.parse_failed:
                parse_failures += 1
                if parse_failures >= MAX_PARSE_FAILURES:
                    accel_cmd = FAILSAFE_ACCEL
                    active_requirement = None
                    active_nudge = 0
                # else: hold previous command unchanged for this period
            else:
                parse_failures = 0
                decision = outcome.decision
                log_out.decisions.append(DecisionRecord(time=now, decision=decision))
                if decision is None:
                    accel_cmd = 0.0
                    active_requirement = None
                    active_nudge = 0
                else:
                    accel_cmd = decision.accel
                    active_requirement = decision.requirement_id
                    active_nudge = decision.nudge
                    if decision.nudge == 1:
                        lateral_ref = road.lane_center_y - NUDGE_OFFSET
                    elif decision.nudge == 2:
                        lateral_ref = road.lane_center_y

        if gain is not None and state.vx_body >= V_MIN:
            gain = maybe_update_gain(
                state.vx_body, gain, GAIN_SPEED_TOLERANCE, scenario.params, scenario.weights
            )
        elif gain is None and state.vx_body >= V_MIN:
            gain = compute_gain(
                build_linear_model(state.vx_body, scenario.params), scenario.weights
            )

        if gain is None or state.vx_body < STANDSTILL_SPEED:
            steer = 0.0
        else:
            steer = steering_command(gain, state, lateral_ref)

        collided_names = [
            p.name for p in peds if detect_collision(state, p.x, p.lateral_position)
        ]
        for name in collided_names:
            log_out.collisions.append(CollisionEvent(time=now, pedestrian_name=name))

        log_out.steps.append(
            StepRecord(
                time=now,
                state=state,
                accel_cmd=accel_cmd,
                steer_cmd=steer,
                requirement_id=active_requirement,
                nudge=active_nudge,
                lateral_ref=lateral_ref,
                ped_lateral=tuple(p.lateral_position for p in peds),
                collided=bool(collided_names),
            )
        )

        command = ControlCommand(steer=steer, accel=accel_cmd)
        state = step_euler(state, command, scenario.dt, scenario.params)
        if state.vx_body > scenario.target_speed:
            state = replace(state, vx_body=scenario.target_speed)

        for ped in peds:
            if now >= ped.start_delay and ped.lateral_position < road.road_y_max:
                ped.lateral_position = min(
                    road.road_y_max, ped.lateral_position + ped.crossing_speed * scenario.dt
                )

        if state.x_world > exit_x:
            break

    if record_path is not None and log_out.transcript:
        record_transcript(log_out.transcript, record_path)
    return log_out


@dataclass(frozen=True)
class _InstantOutcome:
    decision: Decision | None
    parse_failed: bool


def _decide_instant(
    scenario: Scenario,
    source: DecisionSource,
    state: VehicleState,
    peds: list[Pedestrian],
    now: float,
    lateral_ref: float,
    log_out: SimLog,
) -> _InstantOutcome:
    """Ask about every rule-asserting pedestrian situation and arbitrate."""
    has_nudged = lateral_ref != scenario.road.lane_center_y
    assessments = [
        rules.assess(
            state,
            _snapshot(p, now),
            scenario.road,
            scenario.target_speed,
            has_nudged,
            scenario.profile,
        )
        for p in peds
    ]
    any_active = any(a.phase in ACTIVE_PHASES for a in assessments)

    collected: list[Decision] = []
    parse_failed = False
    for ped, assessment in zip(peds, assessments):
        sentence = phase_sentence(assessment)
        if sentence is None:
            continue
        report = _build_report(assessment, state, ped.name, scenario.profile, sentence)
        question = render_question(report)
        response = source.decide(Query(question=question, assessment=assessment))
        log_out.transcript.append(
            TranscriptEntry(
                sim_time=now,
                question=question,
                response=response,
                latency=source.last_latency,
                backend_kind=source.entry_kind,
            )
        )
        try:
            collected.append(parse_response(response))
        except MalformedResponse as exc:
            log.warning("unparseable reply at t=%.2f: %s", now, exc)
            parse_failed = True

    if parse_failed:
        return _InstantOutcome(decision=None, parse_failed=True)

    if any_active:
        collected = [d for d in collected if d.requirement_id != 7]
    return _InstantOutcome(decision=arbitrate(collected), parse_failed=False)
