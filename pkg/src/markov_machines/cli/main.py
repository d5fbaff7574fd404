"""``markov-machines`` command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from markov_machines.cli.commands import (
    SUITES,
    cmd_check,
    cmd_filter,
    cmd_kalman,
    cmd_oracle,
    cmd_unroll,
)
from markov_machines.cli.report import RunReport, render
from markov_machines.config import load_settings
from markov_machines.errors import (
    ConfigError,
    MarkovMachinesError,
    NotAComb,
    NotAGenerator,
    NotUnifilar,
    ParseError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CHECK = 3
EXIT_IMPOSSIBLE = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="markov-machines",
        description="Exact filtering, checks and unrolling for finite stochastic machines.",
    )
    parser.add_argument("--config", help="YAML settings file")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[], help="Settings override key=value"
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    parser.add_argument("--out", help="Write the report here (.json or .md) instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    filt = sub.add_parser("filter", help="Filter an observation trace")
    filt.add_argument("--machine", required=True, help="Machine YAML file")
    filt.add_argument("--prior", help="Prior weights in state order, e.g. 1/2,1/2")
    filt.add_argument("--inputs", help="Comma separated inputs")
    filt.add_argument("--outputs", default="", help="Comma separated outputs")

    check = sub.add_parser("check", help="Run exact checks on a machine")
    check.add_argument("--machine", required=True, help="Machine YAML file")
    check.add_argument("--suite", choices=[*SUITES, "all"], default="all")

    oracle = sub.add_parser("oracle", help="Compare the filter with the brute-force posterior")
    oracle.add_argument("--machine", required=True, help="Machine YAML file")
    oracle.add_argument("--trials", type=int, default=200)
    oracle.add_argument("--horizon", type=int, default=5)
    oracle.add_argument("--seed", type=int, required=True)
    oracle.add_argument("--parallel", type=int, default=0, help="Worker threads for trials")

    unroll = sub.add_parser("unroll", help="Unroll a comb machine into a controlled process")
    unroll.add_argument("--machine", required=True, help="Machine YAML file")
    unroll.add_argument("--prior", help="Prior weights in state order")
    unroll.add_argument("--horizon", type=int, required=True)

    kalman = sub.add_parser("kalman", help="Run the Kalman filter on an observation trace")
    kalman.add_argument("--system", required=True, help="Kalman system YAML file")
    kalman.add_argument("--observations", required=True, help="Observation trace YAML file")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def run(args: argparse.Namespace) -> RunReport:
    settings = load_settings(args.config, args.overrides)
    if args.command == "filter":
        return cmd_filter(args.machine, args.prior, args.inputs, args.outputs)
    if args.command == "check":
        return cmd_check(args.machine, args.suite, settings)
    if args.command == "oracle":
        return cmd_oracle(args.machine, args.trials, args.horizon, args.seed, settings, args.parallel)
    if args.command == "unroll":
        return cmd_unroll(args.machine, args.prior, args.horizon, settings)
    return cmd_kalman(args.system, args.observations, settings)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        report = run(args)
    except (ParseError, ConfigError) as exc:
        logger.error("%s", exc)
        return EXIT_PARSE
    except (NotAComb, NotUnifilar, NotAGenerator) as exc:
        logger.error("check failed: %s", exc)
        return EXIT_CHECK
    except MarkovMachinesError as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_PARSE
    out = Path(args.out) if args.out else None
    text = render(report, out)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
