"""Main entry point for the cocycle workbench"""

import argparse
import asyncio
import sys
from pathlib import Path
from typing import List, Optional

from src.config.settings import get_settings
from src.core.errors import WorkbenchError
from src.orchestrator.experiments import load_experiment
from src.orchestrator.outputs import emit_outputs, parse_formats
from src.orchestrator.pipelines import run_experiment
from src.orchestrator.verify import verify_run
from src.utils.logging import get_logger, setup_logging

EXIT_OK = 0
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cocycle-workbench",
        description="Construct and certify coboundaries and non-coboundaries of measure-preserving maps",
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Log level",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one experiment document")
    run.add_argument("config", type=Path, help="Experiment JSON document")
    run.add_argument("--out", type=Path, help="Parent directory for the run directory (default: OUTPUT_DIR)")
    run.add_argument("--formats", default="csv,json,svg", help="Comma-separated subset of csv,json,svg")

    verify = commands.add_parser("verify", help="Re-check the certificates of a run directory")
    verify.add_argument("rundir", type=Path)
    verify.add_argument("--replay", action="store_true", help="Re-run the stored config and compare report.json")

    plot = commands.add_parser("plot", help="Redraw the norm plot of a run directory")
    plot.add_argument("rundir", type=Path)
    return parser


def _run(args: argparse.Namespace) -> int:
    logger = get_logger(__name__)
    formats = parse_formats(args.formats)
    experiment = load_experiment(args.config)
    result, run_dir = asyncio.run(run_experiment(experiment, args.out, formats))
    logger.info("run_finished", run_dir=str(run_dir), status=result.status.value, exit_code=result.exit_code)
    if result.error is not None:
        raise result.error
    print(run_dir)
    return EXIT_OK


def _verify(args: argparse.Namespace) -> int:
    summary = verify_run(args.rundir, replay=args.replay)
    print(f"{summary.pipeline}: {len(summary.checks)} checks passed")
    return EXIT_OK


def _plot(args: argparse.Namespace) -> int:
    for path in emit_outputs(args.rundir, ["svg"]):
        print(path)
    return EXIT_OK


COMMANDS = {"run": _run, "verify": _verify, "plot": _plot}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    settings = get_settings()
    setup_logging(
        log_level=args.log_level or settings.log_level,
        log_file=settings.log_file_path,
        json_format=settings.json_logs,
    )

    try:
        return COMMANDS[args.command](args)
    except WorkbenchError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
