"""Command line surface: argument validation, scenario files, CSV
round-trip, SVG determinism and exit codes."""

import json

import pytest

from egosim.backends import OracleSource
from egosim.cli import (
    EXIT_BACKEND,
    EXIT_COLLISION,
    EXIT_OK,
    EXIT_USAGE,
    export_csv,
    emit_plots,
    load_csv,
    load_scenario,
    main,
    parse_args,
)
from egosim.harness import demo_scenario, run


@pytest.fixture(scope="module")
def demo_log():
    return run(demo_scenario(0.5), OracleSource())


# ------------------------------------------------------------------- args


def test_parse_args_demo_defaults():
    opts = parse_args(["--demo-scenario"])
    assert opts.use_demo and opts.scenario_path is None
    assert opts.backend == "oracle"
    assert opts.period == 0.5
    assert opts.dt == 0.01
    assert opts.duration == 15.0
    assert opts.model == "gemini-1.5-flash"
    assert opts.api_key_env == "GOOGLE_API_KEY"
    assert opts.min_interval == 4.0
    assert opts.timeout == 30.0
    assert opts.retries == 2
    assert not opts.plots


def test_parse_args_full_form():
    opts = parse_args(
        [
            "--scenario", "sc.json",
            "--backend", "replay",
            "--replay", "t.jsonl",
            "--period", "0.25",
            "--out", "outdir",
            "--plots",
            "--record", "rec.jsonl",
        ]
    )
    assert opts.scenario_path == "sc.json"
    assert opts.backend == "replay"
    assert opts.replay_path == "t.jsonl"
    assert opts.period == 0.25
    assert opts.plots


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["--demo-scenario", "--scenario", "x.json"],
        ["--demo-scenario", "--backend", "replay"],
        ["--demo-scenario", "--replay", "t.jsonl"],
        ["--demo-scenario", "--period", "0"],
        ["--demo-scenario", "--backend", "psychic"],
        ["--demo-scenario", "--bogus"],
    ],
)
def test_parse_args_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        parse_args(argv)
    assert exc.value.code == EXIT_USAGE


# --------------------------------------------------------------- scenarios


def test_load_scenario_round_trip(tmp_path):
    doc = {
        "ego": {"x": 5.0, "y": 2.0, "speed": 8.0},
        "target_speed": 12.0,
        "road": {"y_min": 0.0, "y_max": 4.0, "lane_center": 2.0},
        "pedestrians": [
            {"name": "A", "x": 40.0, "crossing_speed": 1.0, "start_delay": 2.0}
        ],
    }
    path = tmp_path / "sc.json"
    path.write_text(json.dumps(doc))
    scenario = load_scenario(path, period=0.5, dt=0.01, duration=10.0)
    assert scenario.initial_state.x_world == 5.0
    assert scenario.initial_state.vx_body == 8.0
    assert scenario.target_speed == 12.0
    assert scenario.pedestrians[0].name == "A"
    assert scenario.decision_period == 0.5
    assert scenario.duration == 10.0


def test_bundled_scenario_file_loads():
    import pathlib

    bundled = pathlib.Path(__file__).resolve().parents[1] / "scenarios" / "jaywalkers.json"
    scenario = load_scenario(bundled, period=0.5, dt=0.01, duration=15.0)
    assert [p.name for p in scenario.pedestrians] == ["Ped1", "Ped2"]
    assert scenario.pedestrians[0].x == 45.0


# -------------------------------------------------------------------- csv


def test_csv_round_trips_at_full_precision(tmp_path, demo_log):
    path = tmp_path / "run.csv"
    export_csv(demo_log, path)
    header, rows = load_csv(path)
    assert header[:12] == [
        "time", "x", "y", "yaw", "vx", "vy", "yaw_rate",
        "accel_cmd", "steer_cmd", "req_id", "nudge", "lateral_ref",
    ]
    assert header[12:] == ["ped1_y", "ped2_y", "collision_flag"]
    assert len(rows) == len(demo_log.steps)
    for row, rec in zip(rows, demo_log.steps):
        assert row[0] == rec.time                      # exact, not approx
        assert row[1] == rec.state.x_world
        assert row[2] == rec.state.y_world
        assert row[4] == rec.state.vx_body
        assert row[8] == rec.steer_cmd
        assert row[9] == (rec.requirement_id or 0)
        assert row[12] == rec.ped_lateral[0]
        assert row[14] == (1.0 if rec.collided else 0.0)


def test_csv_has_schema_line(tmp_path, demo_log):
    path = tmp_path / "run.csv"
    export_csv(demo_log, path)
    assert path.read_text().startswith("# schema: egosim.run.v1\n")
    with pytest.raises(ValueError):
        load_csv(__file__)


def test_csv_bytes_are_deterministic(tmp_path):
    paths = []
    for i in (1, 2):
        log = run(demo_scenario(0.5), OracleSource())
        p = tmp_path / f"run{i}.csv"
        export_csv(log, p)
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


# ------------------------------------------------------------------- svg


def test_svg_outputs_are_deterministic(tmp_path, demo_log):
    first = emit_plots(demo_log, tmp_path / "a")
    second = emit_plots(demo_log, tmp_path / "b")
    assert [p.name for p in first] == ["speed.svg", "lateral.svg", "trajectory.svg"]
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes()


# ------------------------------------------------------------------ main


def test_main_demo_run_exits_clean(tmp_path, capsys):
    code = main(["--demo-scenario", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / "run.csv").exists()
    out = capsys.readouterr().out
    assert "collisions: 0" in out


def test_main_collision_exit_code(tmp_path):
    code = main(["--demo-scenario", "--period", "2.0", "--out", str(tmp_path)])
    assert code == EXIT_COLLISION


def test_main_plots_flag_writes_svgs(tmp_path):
    code = main(["--demo-scenario", "--plots", "--out", str(tmp_path)])
    assert code == EXIT_OK
    for name in ("speed.svg", "lateral.svg", "trajectory.svg"):
        assert (tmp_path / name).exists()


def test_main_record_then_replay_matches(tmp_path):
    rec = tmp_path / "t.jsonl"
    assert main(["--demo-scenario", "--out", str(tmp_path / "a"), "--record", str(rec)]) == EXIT_OK
    assert (
        main(
            [
                "--demo-scenario",
                "--backend", "replay",
                "--replay", str(rec),
                "--out", str(tmp_path / "b"),
            ]
        )
        == EXIT_OK
    )
    assert (tmp_path / "a" / "run.csv").read_bytes() == (tmp_path / "b" / "run.csv").read_bytes()


def test_main_missing_scenario_file_is_usage_error(tmp_path, capsys):
    code = main(["--scenario", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "cannot load scenario" in capsys.readouterr().err


def test_main_missing_replay_file_is_usage_error(tmp_path):
    code = main(
        [
            "--demo-scenario",
            "--backend", "replay",
            "--replay", str(tmp_path / "nope.jsonl"),
            "--out", str(tmp_path),
        ]
    )
    assert code == EXIT_USAGE


def test_main_llm_without_key_is_backend_error(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("GOOGLE_API_KEY", raising=False)
    code = main(["--demo-scenario", "--backend", "llm", "--out", str(tmp_path)])
    assert code == EXIT_BACKEND
    assert "GOOGLE_API_KEY" in capsys.readouterr().err


def test_main_replay_divergence_is_backend_error(tmp_path):
    rec = tmp_path / "t.jsonl"
    assert main(["--demo-scenario", "--out", str(tmp_path / "a"), "--record", str(rec)]) == EXIT_OK
    # Replaying against a different cadence diverges immediately.
    code = main(
        [
            "--demo-scenario",
            "--period", "0.25",
            "--backend", "replay",
            "--replay", str(rec),
            "--out", str(tmp_path / "c"),
        ]
    )
    assert code == EXIT_BACKEND