"""Deterministic supervisory-control simulation for a self-driving EGO.

A planar bicycle model tracks a straight lane under LQR steering while a
decision layer, consulted at a fixed period, chooses longitudinal
acceleration and lateral nudges from rules about jaywalking pedestrians.
Decisions can come from the built-in rule oracle, a hosted LLM, or a
recorded transcript, interchangeably.
"""

from .backends import (
    BackendConfig,
    BackendError,
    MissingApiKeyError,
    OracleSource,
    RateLimitedError,
    ReplayExhaustedError,
    ReplayMismatchError,
    ReplaySource,
    RequestTimeoutError,
    TranscriptEntry,
    load_transcript,
    make_source,
    record_transcript,
)
from .dynamics import (
    ControlCommand,
    StateDerivative,
    VehicleParams,
    VehicleState,
    derivatives,
    slip_angles,
    step_euler,
    tire_forces,
)
from .harness import (
    CollisionEvent,
    DecisionRecord,
    Pedestrian,
    Scenario,
    SimLog,
    StepRecord,
    demo_scenario,
    detect_collision,
    run,
)
from .lateral import (
    GainMatrix,
    LinearLateralModel,
    LqrWeights,
    build_linear_model,
    compute_gain,
    maybe_update_gain,
    steering_command,
)
from .riccati import RiccatiSolverError, care_residual, solve_care
from .rules import (
    Assessment,
    BrakingProfile,
    CrossingPhase,
    Decision,
    PedestrianSnapshot,
    RoadGeometry,
    arbitrate,
    assess,
    braking_band,
    classify_pedestrian,
    evaluate_rules,
    stopping_distance,
)
from .translation import (
    MalformedResponse,
    SituationReport,
    parse_response,
    render_decision,
    render_question,
    render_system_prompt,
)

__version__ = "0.1.0"

__all__ = [
    "BackendConfig",
    "BackendError",
    "MissingApiKeyError",
    "OracleSource",
    "RateLimitedError",
    "ReplayExhaustedError",
    "ReplayMismatchError",
    "ReplaySource",
    "RequestTimeoutError",
    "TranscriptEntry",
    "load_transcript",
    "make_source",
    "record_transcript",
    "ControlCommand",
    "StateDerivative",
    "VehicleParams",
    "VehicleState",
    "derivatives",
    "slip_angles",
    "step_euler",
    "tire_forces",
    "CollisionEvent",
    "DecisionRecord",
    "Pedestrian",
    "Scenario",
    "SimLog",
    "StepRecord",
    "demo_scenario",
    "detect_collision",
    "run",
    "GainMatrix",
    "LinearLateralModel",
    "LqrWeights",
    "build_linear_model",
    "compute_gain",
    "maybe_update_gain",
    "steering_command",
    "RiccatiSolverError",
    "care_residual",
    "solve_care",
    "Assessment",
    "BrakingProfile",
    "CrossingPhase",
    "Decision",
    "PedestrianSnapshot",
    "RoadGeometry",
    "arbitrate",
    "assess",
    "braking_band",
    "classify_pedestrian",
    "evaluate_rules",
    "stopping_distance",
    "MalformedResponse",
    "SituationReport",
    "parse_response",
    "render_decision",
    "render_question",
    "render_system_prompt",
    "__version__",
]
