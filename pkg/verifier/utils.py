"""
Utility functions for the verification CLI.

Logger setup, argument parsing, and report output.
"""
import argparse
import json
import logging
import os
import sys
from datetime import datetime
from typing import Dict, List, Optional, Sequence

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import DATA_PATHS, LOGGING_CONFIG, SAMPLING_CONFIG, VERIFY_CONFIG
from verifier.suites import SuiteReport

# library packages whose loggers share the run handlers
LIBRARY_LOGGERS = ("calculus", "geometry", "verifier")


def setup_logger(name: str = "verifier", log_to_file: bool = True) -> logging.Logger:
    """
    Set up and configure the logger for a verification run.

    Console output goes to stderr so the JSON report on stdout stays clean.
    The same handlers are attached to the library package loggers.

    Args:
        name: Logger name (default: verifier)
        log_to_file: Also write a timestamped log file under the logs directory

    Returns:
        Configured logger instance
    """
    level = getattr(logging, LOGGING_CONFIG["level"].upper(), logging.INFO)

    # Create formatter
    formatter = logging.Formatter(LOGGING_CONFIG["format"])

    # Create console handler and set level
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    handlers: List[logging.Handler] = [console_handler]

    # Create file handler and set level
    log_prefix = LOGGING_CONFIG.get("file_prefix")
    log_path = None
    if log_prefix and log_to_file:
        log_dir = DATA_PATHS["logs"]
        os.makedirs(log_dir, exist_ok=True)

        # Add timestamp to log filename to create unique logs for each run
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        log_path = os.path.join(log_dir, f"{log_prefix}_{timestamp}.log")

        file_handler = logging.FileHandler(log_path)
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        handlers.append(file_handler)

    for logger_name in dict.fromkeys((name,) + LIBRARY_LOGGERS):
        package_logger = logging.getLogger(logger_name)
        package_logger.setLevel(level)
        for handler in list(package_logger.handlers):
            package_logger.removeHandler(handler)
        for handler in handlers:
            package_logger.addHandler(handler)
        # Prevent logs from being propagated to the root logger
        package_logger.propagate = False

    logger = logging.getLogger(name)
    if log_path:
        logger.info(f"Logging to file: {log_path}")
    return logger


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"tolerance must be positive, got {value}")
    return value


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """
    Parse command line arguments.

    Returns:
        Parsed arguments; ``command`` is ``verify`` or ``fixtures``
    """
    parser = argparse.ArgumentParser(
        prog="run_verification.py",
        description="Verify second-order tangent bundle constructions on fixture manifolds",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    verify = subparsers.add_parser("verify", help="Run a verification suite on a fixture")
    verify.add_argument("--config", required=True,
                        help="Fixture file path or built-in fixture name")
    verify.add_argument("--suite", default="all", choices=["all"] + VERIFY_CONFIG["suites"],
                        help="Suite to run (default: all suites the fixture supports)")
    verify.add_argument("--seed", type=int, default=SAMPLING_CONFIG["seed"],
                        help=f"Random seed (default: {SAMPLING_CONFIG['seed']})")
    verify.add_argument("--tol-struct", type=_positive_float, dest="structural",
                        help="Structural tolerance (cocycles, roundtrips, compatibility)")
    verify.add_argument("--tol-fd", type=_positive_float, dest="fd",
                        help="Finite-difference tolerance")
    verify.add_argument("--tol-fd-metric", type=_positive_float, dest="fd_metric",
                        help="Tolerance for metric-derived Christoffel symbols")
    verify.add_argument("--tol-group", type=_positive_float, dest="group",
                        help="Tolerance for tower and H0 identities")
    verify.add_argument("--out", help="Write the JSON report here instead of standard output "
                        "(a bare file name goes to the reports directory)")
    verify.add_argument("--fixture-dir", help="Extra fixture directory (default: $T2_FIXTURE_DIR)")
    verify.add_argument("--no-progress", action="store_true", help="Hide the progress bar")
    verify.add_argument("--no-log-file", action="store_true", help="Log to the console only")

    fixtures = subparsers.add_parser("fixtures", help="Inspect the available fixtures")
    fixtures_sub = fixtures.add_subparsers(dest="action", required=True)
    listing = fixtures_sub.add_parser("list", help="List built-in and user fixtures")
    listing.add_argument("--fixture-dir", help="Extra fixture directory (default: $T2_FIXTURE_DIR)")
    listing.add_argument("--no-log-file", action="store_true", help="Log to the console only")

    return parser.parse_args(argv)


def tolerance_overrides(args: argparse.Namespace) -> Dict[str, float]:
    """The tolerance flags that were given on the command line."""
    keys = ("structural", "fd", "fd_metric", "group")
    return {key: getattr(args, key) for key in keys if getattr(args, key, None) is not None}


def report_json(report: SuiteReport) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False)


def save_report(report: SuiteReport, output_path: str) -> str:
    """
    Save a suite report as JSON.

    A bare file name is placed in the reports directory.

    Args:
        report: Report to save
        output_path: Path of the JSON file

    Returns:
        Path the report was written to
    """
    directory = os.path.dirname(output_path)
    if not directory:
        directory = DATA_PATHS["reports"]
        output_path = os.path.join(directory, output_path)
    os.makedirs(directory, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        f.write(report_json(report))
        f.write("\n")
    return output_path


def format_summary(report: SuiteReport) -> str:
    """Human summary table: one row per check id with counts and the worst residual."""
    rows: Dict[str, Dict] = {}
    for record in report.report.sorted_records():
        row = rows.setdefault(record.check_id, {"checks": 0, "failed": 0, "worst": 0.0, "tolerance": record.tolerance})
        row["checks"] += 1
        row["failed"] += 0 if record.passed else 1
        row["worst"] = max(row["worst"], record.residual)

    width = max([len("check")] + [len(check_id) for check_id in rows])
    lines = [
        f"Fixture {report.fixture}, suite {report.suite}, seed {report.seed}",
        f"{'check':<{width}}  {'n':>5}  {'failed':>6}  {'worst':>10}  {'tolerance':>10}",
        "-" * (width + 39),
    ]
    for check_id, row in rows.items():
        lines.append(f"{check_id:<{width}}  {row['checks']:>5}  {row['failed']:>6}  "
                     f"{row['worst']:>10.3e}  {row['tolerance']:>10.1e}")
    status = "PASS" if report.passed else "FAIL"
    lines.append(f"{status}: {len(report.report.records)} checks, {len(report.report.violations)} failed, "
                 f"{report.wall_time:.2f}s")
    return "\n".join(lines)


def format_fixture_list(entries: List[Dict[str, str]]) -> str:
    if not entries:
        return "No fixtures found"
    width = max(len(entry["name"]) for entry in entries)
    return "\n".join(f"{entry['name']:<{width}}  [{entry['origin']}]  {entry['description']}" for entry in entries)
