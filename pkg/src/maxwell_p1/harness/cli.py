"""``maxwell-p1`` command line.

Exit codes: 0 success, 2 usage error, 3 at least one run blew up, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, add_study_arguments, config_from_args
from .output import emit_table, write_outputs
from .study import run_study

EXIT_OK, EXIT_USAGE, EXIT_BLOWUP, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("maxwell_p1")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="maxwell-p1",
        description="Convergence studies for the explicit lumped-mass P1 Maxwell scheme.",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    study = sub.add_parser("study", help="run a (level, m) convergence study")
    add_study_arguments(study)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"maxwell-p1: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    log.info("running %d cases", len(config.runs))
    try:
        result = run_study(config)
    except OSError as exc:
        print(f"maxwell-p1: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if "table" in config.formats:
        for m in config.m_values:
            sys.stdout.write(emit_table(result, m) + "\n")
    try:
        for path in write_outputs(result):
            log.info("wrote %s", path)
    except OSError as exc:
        print(f"maxwell-p1: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if result.any_blowup:
        bad = [(r.m, r.level) for r in result.runs if not r.ok]
        print(f"maxwell-p1: unstable runs (m, level): {bad}", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
