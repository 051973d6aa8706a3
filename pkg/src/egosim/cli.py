"""Command line front end: run a scenario, export CSV and SVG plots.

Exit codes: 0 clean run, 2 usage error, 3 a collision occurred,
4 the decision backend failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .backends import (
    BackendConfig,
    BackendError,
    MissingApiKeyError,
    make_source,
)
from .dynamics import VehicleState
from .harness import Pedestrian, Scenario, SimLog, demo_scenario, run
from .rules import RoadGeometry

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COLLISION = 3
EXIT_BACKEND = 4

CSV_SCHEMA = "egosim.run.v1"

_CSV_FIXED_COLUMNS = [
    "time",
    "x",
    "y",
    "yaw",
    "vx",
    "vy",
    "yaw_rate",
    "accel_cmd",
    "steer_cmd",
    "req_id",
    "nudge",
    "lateral_ref",
]


@dataclass(frozen=True)
class RunOptions:
    scenario_path: str | None
    use_demo: bool
    backend: str
    period: float
    dt: float
    duration: float
    out_dir: str
    plots: bool
    record_path: str | None
    replay_path: str | None
    model: str
    api_key_env: str
    min_interval: float
    timeout: float
    retries: int


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="egosim",
        description="Supervised driving simulation with rule, LLM or replay decisions.",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument(
        "--demo-scenario",
        action="store_true",
        help="run the bundled two-pedestrian scenario",
    )
    source.add_argument("--scenario", metavar="PATH", help="scenario JSON file")
    parser.add_argument(
        "--backend",
        choices=("oracle", "llm", "replay"),
        default="oracle",
        help="decision source (default: oracle)",
    )
    parser.add_argument("--period", type=float, default=0.5, help="decision period, s")
    parser.add_argument("--dt", type=float, default=0.01, help="integration step, s")
    parser.add_argument("--duration", type=float, default=15.0, help="max sim time, s")
    parser.add_argument("--out", default="runs", help="output directory")
    parser.add_argument("--plots", action="store_true", help="also write SVG plots")
    parser.add_argument(
        "--record", metavar="PATH", help="record the transcript to this JSONL file"
    )
    parser.add_argument(
        "--replay", metavar="PATH", help="transcript JSONL to replay (backend=replay)"
    )
    parser.add_argument("--model", default="gemini-1.5-flash", help="LLM model id")
    parser.add_argument(
        "--api-key-env",
        default="GOOGLE_API_KEY",
        help="environment variable holding the API key",
    )
    parser.add_argument(
        "--min-interval",
        type=float,
        default=4.0,
        help="minimum seconds between LLM requests",
    )
    parser.add_argument("--timeout", type=float, default=30.0, help="HTTP timeout, s")
    parser.add_argument("--retries", type=int, default=2, help="LLM retry budget")
    return parser


def parse_args(argv: list[str]) -> RunOptions:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.backend == "replay" and not ns.replay:
        parser.error("--backend replay requires --replay PATH")
    if ns.replay and ns.backend != "replay":
        parser.error("--replay only makes sense with --backend replay")
    if ns.period <= 0 or ns.dt <= 0:
        parser.error("--period and --dt must be positive")
    return RunOptions(
        scenario_path=ns.scenario,
        use_demo=ns.demo_scenario,
        backend=ns.backend,
        period=ns.period,
        dt=ns.dt,
        duration=ns.duration,
        out_dir=ns.out,
        plots=ns.plots,
        record_path=ns.record,
        replay_path=ns.replay,
        model=ns.model,
        api_key_env=ns.api_key_env,
        min_interval=ns.min_interval,
        timeout=ns.timeout,
        retries=ns.retries,
    )


def load_scenario(path: str | Path, period: float, dt: float, duration: float) -> Scenario:
    """Build a Scenario from a JSON file plus run cadence options."""
    with Path(path).open("r", encoding="utf-8") as fh:
        obj = json.load(fh)
    ego = obj["ego"]
    road_obj = obj.get("road", {})
    road = RoadGeometry(
        road_y_min=float(road_obj.get("y_min", 0.0)),
        road_y_max=float(road_obj.get("y_max", 4.0)),
        lane_center_y=float(road_obj.get("lane_center", 2.0)),
    )
    return Scenario(
        initial_state=VehicleState(
            x_world=float(ego.get("x", 0.0)),
            y_world=float(ego.get("y", road.lane_center_y)),
            yaw=float(ego.get("yaw", 0.0)),
            vx_body=float(ego.get("speed", 10.0)),
            vy_body=0.0,
            yaw_rate=0.0,
        ),
        pedestrians=[
            Pedestrian(
                name=str(p["name"]),
                x=float(p["x"]),
                crossing_speed=float(p["crossing_speed"]),
                start_delay=float(p["start_delay"]),
            )
            for p in obj.get("pedestrians", [])
        ],
        target_speed=float(obj.get("target_speed", 10.0)),
        decision_period=period,
        dt=dt,
        duration=duration,
        road=road,
    )


def export_csv(sim_log: SimLog, path: str | Path) -> None:
    """Write the per-step log. Floats use repr, so parsing round-trips exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ped_cols = [f"ped{i + 1}_y" for i in range(len(sim_log.pedestrian_names))]
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema: {CSV_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIXED_COLUMNS + ped_cols + ["collision_flag"])
        for r in sim_log.steps:
            writer.writerow(
                [
                    str(r.time),
                    str(r.state.x_world),
                    str(r.state.y_world),
                    str(r.state.yaw),
                    str(r.state.vx_body),
                    str(r.state.vy_body),
                    str(r.state.yaw_rate),
                    str(r.accel_cmd),
                    str(r.steer_cmd),
                    str(r.requirement_id if r.requirement_id is not None else 0),
                    str(r.nudge),
                    str(r.lateral_ref),
                ]
                + [str(y) for y in r.ped_lateral]
                + ["1" if r.collided else "0"]
            )


def load_csv(path: str | Path) -> tuple[list[str], list[list[float]]]:
    """Read back an exported run: (header, rows of floats)."""
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.startswith("# schema:"):
            raise ValueError(f"{path}: missing schema line")
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(cell) for cell in row] for row in reader]
    return header, rows


def emit_plots(sim_log: SimLog, out_dir: str | Path) -> list[Path]:
    """Write speed, lateral-position and top-down trajectory SVGs.

    Output is byte-deterministic: fixed hash salt, no embedded dates.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    times = [r.time for r in sim_log.steps]
    written: list[Path] = []

    with matplotlib.rc_context({"svg.hashsalt": "egosim"}):
        fig, ax = plt.subplots(figsize=(8, 3))
        ax.plot(times, [r.state.vx_body for r in sim_log.steps])
        ax.set_xlabel("time [s]")
        ax.set_ylabel("speed [m/s]")
        ax.grid(True)
        target = out / "speed.svg"
        fig.savefig(target, metadata={"Date": None})
        plt.close(fig)
        written.append(target)

        fig, ax = plt.subplots(figsize=(8, 3))
        ax.plot(times, [r.state.y_world for r in sim_log.steps], label="EGO y")
        ax.plot(
            times,
            [r.lateral_ref for r in sim_log.steps],
            linestyle="--",
            label="reference",
        )
        ax.set_xlabel("time [s]")
        ax.set_ylabel("lateral position [m]")
        ax.legend()
        ax.grid(True)
        target = out / "lateral.svg"
        fig.savefig(target, metadata={"Date": None})
        plt.close(fig)
        written.append(target)

        fig, ax = plt.subplots(figsize=(8, 4))
        ax.plot(
            [r.state.x_world for r in sim_log.steps],
            [r.state.y_world for r in sim_log.steps],
            label="EGO",
        )
        for idx, (name, ped_x) in enumerate(
            zip(sim_log.pedestrian_names, sim_log.pedestrian_x)
        ):
            ys = [r.ped_lateral[idx] for r in sim_log.steps]
            ax.plot([ped_x] * len(ys), ys, linewidth=2, label=name)
        collided = [r for r in sim_log.steps if r.collided]
        if collided:
            ax.scatter(
                [r.state.x_world for r in collided],
                [r.state.y_world for r in collided],
                marker="x",
                color="red",
                zorder=3,
                label="collision",
            )
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.legend()
        ax.grid(True)
        target = out / "trajectory.svg"
        fig.savefig(target, metadata={"Date": None})
        plt.close(fig)
        written.append(target)

    return written


def main(argv: list[str] | None = None) -> int:
    opts = parse_args(sys.argv[1:] if argv is None else argv)

    if opts.use_demo:
        scenario = demo_scenario(opts.period)
        if opts.dt != scenario.dt or opts.duration != scenario.duration:
            scenario = Scenario(
                initial_state=scenario.initial_state,
                pedestrians=scenario.pedestrians,
                target_speed=scenario.target_speed,
                decision_period=opts.period,
                dt=opts.dt,
                duration=opts.duration,
                road=scenario.road,
                params=scenario.params,
                profile=scenario.profile,
                weights=scenario.weights,
            )
    else:
        try:
            scenario = load_scenario(opts.scenario_path, opts.period, opts.dt, opts.duration)
        except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
            print(f"error: cannot load scenario: {exc}", file=sys.stderr)
            return EXIT_USAGE

    config = BackendConfig(
        kind=opts.backend,
        api_key_env_name=opts.api_key_env,
        model_identifier=opts.model,
        min_request_interval=opts.min_interval,
        request_timeout=opts.timeout,
        max_retries=opts.retries,
        transcript_path=opts.replay_path,
    )
    try:
        source = make_source(config)
    except MissingApiKeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    sim_log = run(scenario, source, record_path=opts.record_path)

    out_dir = Path(opts.out_dir)
    export_csv(sim_log, out_dir / "run.csv")
    if opts.plots:
        emit_plots(sim_log, out_dir)

    print(f"steps: {len(sim_log.steps)}")
    print(f"exchanges: {len(sim_log.transcript)}")
    print(f"min speed: {sim_log.min_speed:.2f} m/s")
    print(f"final speed: {sim_log.final_speed:.2f} m/s")
    print(f"min gap: {sim_log.min_gap:.2f} m")
    print(f"collisions: {len(sim_log.collisions)}")

    if sim_log.abort_reason is not None:
        print(f"backend failure: {sim_log.abort_reason}", file=sys.stderr)
        return EXIT_BACKEND
    if sim_log.collision_occurred:
        return EXIT_COLLISION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
