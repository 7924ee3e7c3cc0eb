"""Command line front end.

Four subcommands cover the verification surface: verify-connection sweeps
the connection identities over random jets, integrate runs one geodesic and
reports conserved-quantity drift, curvatures computes the generalized
curvature profile of the projected curve, theorems runs the whole claim
battery. Every subcommand takes the same flags; flag values override the
JSON config file. Reports and CSV files land in --out when given, while
stdout carries the human summary plus timing.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from .config import ConfigError, ExperimentConfig, load_config
from .experiments import (
    run_curvatures,
    run_integrate,
    run_theorems,
    run_verify_connection,
)
from .flow import FlowError
from .frenet import DegenerateProjectionError
from .reports import (
    Report,
    write_profile_csv,
    write_report,
    write_trajectory_csv,
)

COMMANDS = {
    "verify-connection": "check the connection identities on random jets",
    "integrate": "run one geodesic and report conserved-quantity drift",
    "curvatures": "profile the generalized curvatures of the projection",
    "theorems": "run the full claim battery",
}

REPORT_NAMES = {
    "verify-connection": "connection_report.json",
    "integrate": "integrate_report.json",
    "curvatures": "curvatures_report.json",
    "theorems": "theorems_report.json",
}


def _add_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config", metavar="PATH", help="JSON config file; flags override it"
    )
    parser.add_argument("--bundle", choices=("TM", "T1M"), help="phase space")
    parser.add_argument("--n", type=int, help="complex dimension of the base")
    parser.add_argument("--m", type=float, help="holomorphic sectional curvature")
    parser.add_argument("--delta", type=float, help="deformation parameter")
    parser.add_argument("--step", type=float, help="integration step")
    parser.add_argument("--sigma-max", type=float, help="integration horizon")
    parser.add_argument("--pmax", type=int, help="chain order for curvatures")
    parser.add_argument("--seed", type=int, help="generator seed")
    parser.add_argument("--samples", type=int, help="sweep size scaling")
    parser.add_argument("--out", metavar="DIR", help="directory for CSV and JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bergerflow",
        description="deformed bundle metrics: geodesics and projected curvatures",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, text in COMMANDS.items():
        _add_flags(sub.add_parser(name, help=text))
    return parser


FLAG_KEYS = (
    "bundle",
    "n",
    "m",
    "delta",
    "step",
    "sigma_max",
    "pmax",
    "seed",
    "samples",
    "out",
)


def _run(command: str, cfg: ExperimentConfig) -> Report:
    out = cfg.out
    if command == "verify-connection":
        report = run_verify_connection(cfg)
    elif command == "integrate":
        report, traj = run_integrate(cfg)
        if out:
            path = os.path.join(out, "trajectory.csv")
            write_trajectory_csv(traj, path)
            print(f"wrote {path}")
    elif command == "curvatures":
        report, profile = run_curvatures(cfg)
        if out:
            path = os.path.join(out, "profile.csv")
            write_profile_csv(profile, path)
            print(f"wrote {path}")
    elif command == "theorems":
        report = run_theorems(cfg)
    else:
        raise ValueError(f"unknown command {command!r}")
    if out:
        path = os.path.join(out, REPORT_NAMES[command])
        write_report(report, path)
        print(f"wrote {path}")
    return report


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {key: getattr(args, key) for key in FLAG_KEYS}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        report = _run(args.command, cfg)
    except (FlowError, DegenerateProjectionError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - start
    for line in report.summary_lines():
        print(line)
    print(f"elapsed: {elapsed:.2f} s")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
