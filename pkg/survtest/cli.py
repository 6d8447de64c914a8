"""CLI for discrete homogeneity tests under right censoring."""

import argparse
import asyncio
import sys
from pathlib import Path

from . import __version__
from .config import get_settings
from .core import (
    NotComputableError,
    SimulationError,
    SurvTestError,
    build_risk_table,
    cvm_test,
    ingest_csv,
    logrank_test,
    logrank_test_type2,
)
from .core.base import HomogeneityResult, WeightSpec
from .core.exceptions import InvalidInputError
from .core.numerics import imhof_tail, weighted_chisq_sf_mc
from .core.runner import SimulationRunner
from .core.sim import load_config
from .logging_config import configure_logging, get_logger, new_run_id
from .schemas import CommandReport, SimConfig, SimResult, StudyConfig, TestFailure, TestReport

logger = get_logger(__name__)

EXIT_INPUT = 2
EXIT_NOT_COMPUTABLE = 3


def exit_code(error: SurvTestError) -> int:
    """Exit status for a library error."""
    if isinstance(error, (NotComputableError, SimulationError)):
        return EXIT_NOT_COMPUTABLE
    return EXIT_INPUT


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise InvalidInputError(f"cannot read {path}: {e.strerror or e}") from e


def _print_summary(report: CommandReport, results: list[HomogeneityResult]):
    groups = ", ".join(f"{label}={index}" for label, index in report.groups.items())
    print(f"groups: {groups} (dropped: {report.dropped_group})")
    print(f"weight: {report.weight}")
    for result in results:
        window = f"[{result.d_lo}, {result.d_hi}], {result.observable_count} observable"
        if result.df is not None:
            print(
                f"{result.test:<8} X² = {result.statistic:.6g}  df = {result.df}  "
                f"p = {result.p_value:.6g}  ({window})"
            )
        else:
            print(
                f"{result.test:<8} CVM = {result.statistic:.6g}  "
                f"p = {result.p_value:.6g}  ({window}, {len(result.eigenvalues)} eigenvalues)"
            )
    for failure in report.failures:
        print(f"{failure.test:<8} not computable: {failure.message}")


async def homogeneity_command(args) -> int:
    """Handle test command: both homogeneity tests on one sample."""
    sample = ingest_csv(_read_bytes(args.input))
    weight = WeightSpec.parse(args.weight)
    table = build_risk_table(sample.observations, sample.group_labels)
    logger.info("sample_loaded", n=table.n, groups=table.n_groups, max_cat=table.max_cat)

    def run_lr() -> HomogeneityResult:
        if args.type2 is not None:
            return logrank_test_type2(table, weight, args.type2, trajectory=args.trajectory)
        return logrank_test(table, weight, trajectory=args.trajectory)

    results: list[HomogeneityResult] = []
    failures: list[TestFailure] = []
    for name, run in (("LR", run_lr), ("CVM", lambda: cvm_test(table, weight))):
        try:
            results.append(run())
        except NotComputableError as e:
            failures.append(TestFailure(test=name, error=type(e).__name__, message=str(e)))

    report = CommandReport(
        input_digest=sample.digest,
        groups=sample.group_index,
        dropped_group=sample.group_labels[-1],
        weight=str(weight),
        type2_beta=args.type2,
        reports=[TestReport.from_result(r, sample.digest) for r in results],
        failures=failures,
    )

    if args.json:
        print(report.model_dump_json(by_alias=True, indent=2))
    else:
        _print_summary(report, results)

    if failures:
        for failure in failures:
            print(f"error: {failure.test}: {failure.message}", file=sys.stderr)
        return EXIT_NOT_COMPUTABLE
    return 0


def _print_result(result: SimResult):
    print(result.model_dump_json(by_alias=True, indent=2))


def _print_study_table(result: SimResult):
    """One table per censoring scheme; rows are sample sizes, CVM/LR columns per J."""
    for censoring in dict.fromkeys(row.censoring for row in result.rows):
        rows = [row for row in result.rows if row.censoring == censoring]
        populations = list(dict.fromkeys(row.populations for row in rows))
        sizes = list(dict.fromkeys(row.sample_size for row in rows))

        print(f"censoring: {censoring}  (alpha = {result.alpha:g}, R = {result.replications})")
        header = "SS".rjust(6) + "".join(f"J={j}".center(18) for j in populations)
        print(header)
        print(" " * 6 + "".join(f"{'CVM':>9}{'LR':>9}" for _ in populations))
        for size in sizes:
            cells = []
            for j in populations:
                for test in ("CVM", "LR"):
                    level = result.row(test, sample_size=size, populations=j,
                                       censoring=censoring).level
                    cells.append(f"{level:>9.4f}" if level is not None else f"{'-':>9}")
            print(f"{size:>6}" + "".join(cells))
        print()


async def simulate_command(args) -> int:
    """Handle simulate command."""
    cfg = load_config(SimConfig, _read_bytes(args.config))
    runner = SimulationRunner(workers=args.threads)
    _print_result(await runner.level(cfg, timing=args.timing))
    return 0


async def study_command(args) -> int:
    """Handle study command."""
    study = load_config(StudyConfig, _read_bytes(args.config))
    runner = SimulationRunner(workers=args.threads)
    result = await runner.study(study, timing=args.timing)
    if args.table:
        _print_study_table(result)
    else:
        _print_result(result)
    return 0


def _parse_lambdas(text: str) -> list[float]:
    try:
        lambdas = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise InvalidInputError(f"invalid eigenvalue list '{text}'") from e
    if not lambdas:
        raise InvalidInputError("eigenvalue list is empty")
    if any(not value > 0 for value in lambdas):
        raise InvalidInputError("eigenvalues must be > 0")
    return lambdas


async def pvalue_command(args) -> int:
    """Handle pvalue command."""
    lambdas = _parse_lambdas(args.lambdas)
    if args.method == "mc":
        p = weighted_chisq_sf_mc(lambdas, args.x, draws=args.draws, seed=args.seed)
    else:
        p = imhof_tail(lambdas, args.x, tolerance=get_settings().imhof_tolerance)
    print(f"{p:.10g}")
    return 0


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer '{text}'") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be ≥ 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="survtest",
        description="Homogeneity tests for right-censored discrete survival data",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose",
        action="store_true",
        help="Enable debug logging on stderr",
    )

    subparsers = parser.add_subparsers(dest="command", help="Commands")

    # Test command
    test_parser = subparsers.add_parser(
        "test",
        help="Run the log-rank and Cramér-von Mises tests on a CSV sample",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  survtest test --input data.csv
  survtest test --input data.csv --weight fh:0,1 --json
  survtest test --input data.csv --weight tw:0.5 --type2 0.5

Input rows are `group,time,event` with integer times ≥ 1 and event 0 or 1.
        """,
    )
    test_parser.add_argument("-i", "--input", required=True, help="CSV file of observations")
    test_parser.add_argument(
        "-w", "--weight",
        default="unit",
        help="Weight: unit, tw:<gamma> or fh:<beta>,<delta>, optional *<scale> (default: unit)",
    )
    test_parser.add_argument(
        "--type2",
        type=float,
        metavar="BETA",
        help="Stop the log-rank test at the pooled BETA event fraction",
    )
    test_parser.add_argument("--json", action="store_true", help="Print the JSON report")
    test_parser.add_argument(
        "--trajectory",
        action="store_true",
        help="Include the X² path over the category window",
    )

    # Simulate command
    simulate_parser = subparsers.add_parser(
        "simulate",
        help="Estimate empirical significance levels by Monte Carlo",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Config document:
  {"groups": [{"lambda": 100, "n": 300}, {"lambda": 100, "n": 300}],
   "censoring": {"kind": "none"}, "replications": 2000,
   "alpha": 0.05, "weight": "unit", "seed": 1}

SURVTEST_SEED overrides the seed of the document.
        """,
    )
    simulate_parser.add_argument("-c", "--config", required=True, help="JSON config file")
    simulate_parser.add_argument(
        "-t", "--threads",
        type=_positive_int,
        help="Worker processes (default: SURVTEST_WORKERS or 1); never changes results",
    )
    simulate_parser.add_argument(
        "--timing", action="store_true", help="Report wall time in the output"
    )

    # Study command
    study_parser = subparsers.add_parser(
        "study",
        help="Empirical levels over sample sizes, population counts and censoring schemes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Config document:
  {"lambda": 100, "sample_sizes": [50, 100, 300], "populations": [2, 4, 8],
   "censoring": [{"kind": "none"}, {"kind": "poisson", "lambda": 90}],
   "replications": 2000, "alpha": 0.05, "weight": "unit", "seed": 1}
        """,
    )
    study_parser.add_argument("-c", "--config", required=True, help="JSON config file")
    study_parser.add_argument("-t", "--threads", type=_positive_int, help="Worker processes")
    study_parser.add_argument("--timing", action="store_true", help="Report wall time")
    study_parser.add_argument(
        "--table", action="store_true", help="Print text tables instead of JSON"
    )

    # P-value command
    pvalue_parser = subparsers.add_parser(
        "pvalue",
        help="Tail probability of a weighted sum of chi-square(1) variables",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  survtest pvalue --lambdas 0.5,0.5 --x 1.0
  survtest pvalue --lambdas 1 --x 3.841459 --method mc
        """,
    )
    pvalue_parser.add_argument(
        "-l", "--lambdas", required=True, help="Comma-separated positive weights"
    )
    pvalue_parser.add_argument("-x", "--x", type=float, required=True, help="Threshold")
    pvalue_parser.add_argument(
        "-m", "--method",
        choices=["imhof", "mc"],
        default="imhof",
        help="Numerical inversion or Monte Carlo (default: imhof)",
    )
    pvalue_parser.add_argument(
        "--draws",
        type=_positive_int,
        default=1_000_000,
        help="Monte Carlo draws (default: 1000000)",
    )
    pvalue_parser.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")

    return parser


COMMANDS = {
    "test": homogeneity_command,
    "simulate": simulate_command,
    "study": study_command,
    "pvalue": pvalue_command,
}


async def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    settings = get_settings()
    configure_logging(
        json_logs=settings.json_logs,
        log_level="DEBUG" if args.verbose else settings.log_level,
    )
    new_run_id()

    handler = COMMANDS.get(args.command)
    if handler is None:
        parser.print_help()
        return 0

    try:
        return await handler(args)
    except SurvTestError as e:
        logger.debug("command_failed", command=args.command, error=type(e).__name__)
        print(f"error: {e}", file=sys.stderr)
        return exit_code(e)


def cli():
    """Synchronous CLI wrapper."""
    sys.exit(asyncio.run(main()))


if __name__ == "__main__":
    cli()
