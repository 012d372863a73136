# -*- coding: utf-8 -*-
"""Command line front-end running the scenario tasks."""
import argparse
import logging
import sys
from typing import List, Optional

from privacy_power.api import pipeline
from privacy_power.api.exceptions import (
    ScenarioError,
    SolverConvergenceError,
)
from privacy_power.api.scenario import TASKS

log = logging.getLogger("privacy_power")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_SCENARIO = 2
EXIT_CONVERGENCE = 3


def exit_code(errors) -> int:
    """Scenario errors win over non-convergence, anything else is 1."""
    if not errors:
        return EXIT_OK
    exceptions = [error for _, _, error in errors]
    if any(isinstance(error, ScenarioError) for error in exceptions):
        return EXIT_SCENARIO
    if any(isinstance(error, SolverConvergenceError) for error in exceptions):
        return EXIT_CONVERGENCE
    return EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privacy-power",
        description=(
            "Compute privacy-power curves, allocations, heuristics, lower"
            " bounds and simulations of a smart-meter scenario."
        ),
    )
    parser.add_argument(
        "--scenario",
        dest="scenario",
        required=True,
        help="Scenario JSON document.",
    )
    parser.add_argument(
        "-o", "--out",
        dest="output_dir",
        default=".",
        help="Directory the output files are written to.",
    )
    parser.add_argument(
        "--task",
        dest="tasks",
        action="append",
        choices=TASKS,
        default=None,
        help=(
            "Task to run, repeat for several. Replaces the scenario's task"
            " list."
        ),
    )
    parser.add_argument(
        "--verify",
        dest="verify",
        action="store_true",
        help="Re-read the outputs and check the curve properties.",
    )
    parser.add_argument(
        "--seed",
        dest="seed",
        type=int,
        default=None,
        help="Simulation seed (unsigned 64-bit).",
    )
    parser.add_argument(
        "--unit",
        dest="unit",
        choices=("bits", "nats"),
        default=None,
        help="Leakage unit of the outputs.",
    )
    parser.add_argument(
        "--debug",
        dest="debug",
        action="store_true",
        help="Debug log messages."
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(
        sys.argv[1:] if argv is None else argv
    )
    level = logging.INFO
    if args.debug:
        level = logging.DEBUG
    logging.basicConfig(level=level)

    pipeline.install()
    try:
        context = pipeline.create_context(
            args.scenario,
            args.output_dir,
            tasks=args.tasks,
            seed=args.seed,
            unit=args.unit,
            verify=args.verify,
        )
        errors = pipeline.publish(context)
    finally:
        pipeline.uninstall()

    for label, instance, error in errors:
        task = f" [{instance}]" if instance else ""
        log.error("%s: %s%s: %s", args.scenario, label, task, error)
    code = exit_code(errors)
    if code == EXIT_OK:
        log.info(
            "Finished %s, %d output file(s)",
            args.scenario, len(context.data.get("outputs", [])),
        )
    return code


if __name__ == "__main__":
    sys.exit(main())
