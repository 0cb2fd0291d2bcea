from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from backend.channels import CHANNEL_CATALOG
from backend.errors import ConfigError, IntegrationError, LindbladError

from .services import ExperimentService, ResultWriter, VerificationService
from .state import VerificationRequest
from .transformers import TrajectoryTransform

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_ABORTED = 3
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acsp-lindblad", description="GKSL dynamics through the ACSP Euler-Poincare construction")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="integrate a configured experiment and write a CSV trajectory")
    simulate.add_argument("--config", required=True, type=Path)
    simulate.add_argument("--output", type=Path, default=None)

    compare = sub.add_parser("compare", help="integrate the EP and GKSL fields side by side and report the deviation")
    compare.add_argument("--config", required=True, type=Path)
    compare.add_argument("--output", type=Path, default=None)
    compare.add_argument("--threshold", type=float, default=None)

    verify = sub.add_parser("verify", help="run a property suite")
    verify.add_argument("--suite", default="all")
    verify.add_argument("--n", type=int, default=2)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--trials", type=int, default=None)
    verify.add_argument("--output", type=Path, default=None)

    sub.add_parser("channels", help="list the channel presets")
    return parser


def _emit_json(payload: dict, output: Path | None, writer: ResultWriter) -> None:
    if output is None:
        sys.stdout.write(writer.dumps(payload))
    else:
        writer.write_json(output, payload)


def cmd_simulate(args: argparse.Namespace) -> int:
    service = ExperimentService()
    config = service.load(args.config)
    output = args.output or config.output_path
    if output is None:
        raise ConfigError("output_path", "no output path; set output_path in the config or pass --output")
    trajectory = service.simulate(config)
    transform = TrajectoryTransform()
    header, rows = transform.apply(trajectory)
    ResultWriter().write_csv(output, header, rows)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    service = ExperimentService()
    config = service.load(args.config)
    threshold = config.threshold if args.threshold is None else float(args.threshold)
    report = service.compare(config)
    payload = report.as_dict()
    _emit_json(payload, args.output or config.output_path, ResultWriter())
    return EXIT_OK if report.passed(threshold) else EXIT_FAILED


def cmd_verify(args: argparse.Namespace) -> int:
    request = VerificationRequest(suite=args.suite, n=args.n, seed=args.seed, trials=args.trials)
    report = VerificationService().run(request)
    _emit_json(report, args.output, ResultWriter())
    return EXIT_OK if report["passed"] else EXIT_FAILED


def _format_matrix(L: np.ndarray) -> str:
    def entry(z: complex) -> str:
        if abs(z.imag) <= 1e-15:
            return f"{z.real:g}"
        if abs(z.real) <= 1e-15:
            return f"{z.imag:g}i"
        return f"{z.real:g}{z.imag:+g}i"

    return "[" + ", ".join("[" + ", ".join(entry(complex(z)) for z in row) + "]" for row in L) + "]"


def cmd_channels(args: argparse.Namespace) -> int:
    for entry in CHANNEL_CATALOG.values():
        print(f"{entry.name} (n={entry.n}): {entry.description}")
        print(f"  convention: {entry.convention}")
        for channel in entry(1.0):
            print(f"  {channel.label}: gamma={channel.gamma:g} L={_format_matrix(channel.L)}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "verify": cmd_verify,
    "channels": cmd_channels,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT, stream=sys.stderr, force=True)
    logger.debug("command %s", args.command)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"integration aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    except LindbladError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
