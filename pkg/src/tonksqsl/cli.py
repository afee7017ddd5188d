"""Command-line entry point.

Usage::

    tonksqsl <subcommand> [--config FILE] [--out DIR] [--paper-scale]
                          [--threads K] [--no-svg]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
import argparse
import logging
import sys

from . import experiments
from .config import KINDS, PAPER_SCALE, ExperimentConfig, load_config
from .errors import ConfigError, GridTooSmallError, InvalidArgumentError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("tonksqsl")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tonksqsl",
        description="Speed limits and shortcuts to adiabaticity for hard-core bosons and free fermions.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    for kind in KINDS:
        runner = experiments.RUNNERS[kind]
        p = sub.add_parser(kind, help=(runner.__doc__ or "").strip().splitlines()[0])
        p.add_argument("--config", metavar="PATH", help="INI file with experiment parameters")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
        p.add_argument("--paper-scale", action="store_true",
                       help=f"full-size run ({', '.join(f'{k}={v}' for k, v in PAPER_SCALE.items())})")
        p.add_argument("--threads", type=int, default=None, metavar="K",
                       help="worker threads for independent scan points")
        p.add_argument("--no-svg", action="store_true", help="write CSV only")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def make_config(args) -> ExperimentConfig:
    base = ExperimentConfig(kind=args.command)
    if args.paper_scale:
        base = base.replace(**PAPER_SCALE)
    cfg = load_config(args.config, base) if args.config else base
    if cfg.kind != args.command:
        raise ConfigError(f"config declares kind {cfg.kind!r} but the subcommand is {args.command!r}")
    changes = {}
    if args.out:
        changes["out_dir"] = args.out
    if args.no_svg:
        changes["svg"] = False
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        changes["threads"] = args.threads
    return cfg.replace(**changes).validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = make_config(args)
        result = experiments.run(cfg)
        paths = result.write()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidArgumentError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, GridTooSmallError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in paths:
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
