__all__ = ["EXIT_OK", "EXIT_VIOLATION", "EXIT_USAGE", "EXIT_CONVERGENCE", "build_parser", "main"]

import argparse
import logging
from pathlib import Path
import sys
from typing import List, Optional

from .bounds import BoundConstants, load_constants, save_constants
from .exceptions import BranchCutError, ConfigError, ConvergenceError
from .experiments import (CALIBRATION_SAFETY, TRUNCATION_SAFETY, append_report_csv, calibrate,
                          calibration_family, run_sweep, simulate_scenario, write_report_json)
from .scenario import load_scenario, load_sweep
from .suites import SUITE_NAMES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddbounds",
                                     description="Simulate dynamical decoupling cycles and check their error bounds.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only.")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Run one scenario and check every bound.")
    simulate.add_argument("config", type=Path, help="Scenario JSON file.")
    simulate.add_argument("--constants", type=Path, default=None, help="Bound constants file.")
    simulate.add_argument("--json", type=Path, default=Path("report.json"), help="Report JSON (default: report.json).")
    simulate.add_argument("--csv", type=Path, default=Path("report.csv"), help="CSV to append to (default: report.csv).")

    sweep = commands.add_parser("sweep", help="Cycle-count scaling sweep over register size and interval.")
    sweep.add_argument("spec", type=Path, help="Sweep JSON file.")
    sweep.add_argument("--constants", type=Path, default=None, help="Bound constants file.")
    sweep.add_argument("--output", type=Path, default=Path("sweep.csv"), help="Sweep CSV (default: sweep.csv).")
    sweep.add_argument("--workers", type=int, default=None, help="Worker threads (default: DDBOUNDS_WORKERS or 4).")

    verify = commands.add_parser("verify", help="Run a property suite.")
    verify.add_argument("suite", choices=SUITE_NAMES, help="Suite to run.")
    verify.add_argument("--seed", type=int, default=0, help="Base seed (default: 0).")

    calibration = commands.add_parser("calibrate", help="Measure the bound constants.")
    calibration.add_argument("--output", type=Path, default=Path("constants.json"),
                             help="Constants file to write (default: constants.json).")
    calibration.add_argument("--scenarios", type=int, default=40, help="Calibration scenarios (default: 40).")
    calibration.add_argument("--magnus-samples", type=int, default=50, help="Random generators for A_k (default: 50).")
    calibration.add_argument("--safety", type=float, default=CALIBRATION_SAFETY,
                             help=f"Safety factor of c and d (default: {CALIBRATION_SAFETY}).")
    calibration.add_argument("--truncation-safety", type=float, default=TRUNCATION_SAFETY,
                             help=f"Safety factor of the Magnus tail constants (default: {TRUNCATION_SAFETY}).")
    calibration.add_argument("--seed", type=int, default=0, help="Seed (default: 0).")
    return parser


def _constants(path: Optional[Path]) -> BoundConstants:
    consts = load_constants(path)
    if not consts.calibrated:
        logger.warning("Using uncalibrated bound constants; run `ddbounds calibrate` for measured values")
    return consts


def _simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.config)
    consts = _constants(args.constants)
    report = simulate_scenario(scenario, consts)
    write_report_json(report, args.json)
    append_report_csv(report, args.csv)
    for name, check in report.checks.items():
        status = "ok" if check.passed else "VIOLATED"
        print(f"{name:20s} {check.actual:.6e} vs {check.bound:.6e}  {status}{' (vacuous)' if check.vacuous else ''}")
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _sweep(args: argparse.Namespace) -> int:
    spec = load_sweep(args.spec)
    consts = _constants(args.constants)
    rows = run_sweep(spec, consts, args.output, args.workers)
    failed = [row for row in rows if row["status"] != "ok"]
    for row in rows:
        print(f"n={row['n']} tau={row['tau']} J={row['J'] or 'n/a'} m*={row['m_star'] or 'n/a'} "
              f"m_hat={row['m_hat'] or 'n/a'} slope={row['slope_m_star']}")
    if failed:
        logger.warning("%d of %d sweep points failed", len(failed), len(rows))
    return EXIT_OK if len(failed) < len(rows) else EXIT_VIOLATION


def _verify(args: argparse.Namespace) -> int:
    results = run_suite(args.suite, args.seed)
    for result in results:
        print(f"{result.suite:10s} {result.name:36s} {result.passed:4d}/{result.total:<4d} "
              f"{'PASS' if result.ok else 'FAIL'}")
    return EXIT_OK if all(result.ok for result in results) else EXIT_VIOLATION


def _calibrate(args: argparse.Namespace) -> int:
    scenarios = calibration_family(args.scenarios, seed=args.seed + 1)
    constants = calibrate(scenarios, safety=args.safety, magnus_samples=args.magnus_samples, seed=args.seed,
                          truncation_safety=args.truncation_safety)
    save_constants(constants, args.output)
    print(f"c={constants.c:.6g} d={constants.d:.6g} c'={constants.c_prime:.6g} written to {args.output}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _simulate,
    "sweep": _sweep,
    "verify": _verify,
    "calibrate": _calibrate,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the exit code."""
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)
    try:
        return _COMMANDS[args.command](args)
    except (ConvergenceError, BranchCutError) as error:
        logger.error("Outside the convergence domain: %s", error)
        return EXIT_CONVERGENCE
    except ValueError as error:
        logger.error("%s: %s", type(error).__name__, error)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
