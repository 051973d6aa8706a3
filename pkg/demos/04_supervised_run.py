"""End-to-end supervised run with the built-in rule oracle.

Runs the two-jaywalker scenario at the half-second decision cadence,
prints the decision timeline and the headline numbers, then writes the
trajectory CSV and the three plots to demos/out/. Everything here is
offline and deterministic; rerunning produces byte-identical files.
"""

from __future__ import annotations

import pathlib

from egosim import OracleSource, demo_scenario, run
from egosim.cli import emit_plots, export_csv

OUT = pathlib.Path(__file__).parent / "out"


def main() -> None:
    scenario = demo_scenario(decision_period=0.5)
    log = run(scenario, OracleSource())

    print("decision timeline (changes only):")
    previous = object()
    for rec in log.decisions:
        req = rec.decision.requirement_id if rec.decision else None
        if req != previous:
            label = f"Req {req}" if req else "no rule, hold"
            print(f"  t={rec.time:5.2f}  {label}")
            previous = req

    print()
    print(f"steps simulated : {len(log.steps)}")
    print(f"exchanges       : {len(log.transcript)}")
    print(f"min speed       : {log.min_speed:.2f} m/s")
    print(f"final speed     : {log.final_speed:.2f} m/s")
    print(f"min gap         : {log.min_gap:.2f} m")
    print(f"collisions      : {len(log.collisions)}")

    OUT.mkdir(exist_ok=True)
    csv_path = OUT / "supervised_run.csv"
    export_csv(log, csv_path)
    plots = emit_plots(log, OUT)
    print()
    print(f"wrote {csv_path}")
    for path in plots:
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
