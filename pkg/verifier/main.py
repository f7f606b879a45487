"""
Command-line entry point for the fixture verifier.

Exit status: 0 when every check passes, 1 when a check fails, 2 on usage
or fixture errors.
"""
import os
import sys
from typing import Optional, Sequence

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from calculus.errors import FixtureError, GeometryError
from verifier.fixtures import list_fixtures
from verifier.suites import run_suite
from verifier.utils import (
    format_fixture_list,
    format_summary,
    parse_args,
    report_json,
    save_report,
    setup_logger,
    tolerance_overrides,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def run_verify(args, logger) -> int:
    try:
        report = run_suite(args.config, suite=args.suite, seed=args.seed,
                           overrides=tolerance_overrides(args), user_dir=args.fixture_dir,
                           progress=not args.no_progress)
    except FixtureError as e:
        location = f" (line {e.line}, column {e.column})" if e.line is not None else ""
        logger.error(f"Fixture error{location}: {e}")
        return EXIT_USAGE
    except GeometryError as e:
        logger.error(f"Cannot run verification: {e}")
        return EXIT_USAGE

    if args.out:
        saved_path = save_report(report, args.out)
        logger.info(f"Saved report to {saved_path}")
    else:
        sys.stdout.write(report_json(report) + "\n")
    sys.stderr.write(format_summary(report) + "\n")

    for record in report.report.violations:
        logger.warning(f"FAILED {record.check_id} at {record.location}: residual {record.residual:.3e} "
                       f"(tolerance {record.tolerance:.1e}) {record.detail}".rstrip())
    return EXIT_PASS if report.passed else EXIT_FAIL


def run_fixtures(args, logger) -> int:
    entries = list_fixtures(args.fixture_dir)
    logger.info(f"Found {len(entries)} fixtures")
    sys.stdout.write(format_fixture_list(entries) + "\n")
    return EXIT_PASS


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the requested command and return the exit status."""
    try:
        args = parse_args(argv)
    except SystemExit as e:
        # argparse exits 0 for --help and 2 on bad usage
        return int(e.code or 0)
    logger = setup_logger("verifier", log_to_file=not args.no_log_file)

    if args.command == "verify":
        return run_verify(args, logger)
    return run_fixtures(args, logger)


if __name__ == "__main__":
    sys.exit(main())
