"""Command-line front door.

Run via: ergoline <command> --config experiment.json
Or:      python -m ergoline.experiments.runner <command> --config experiment.json

Exit codes: 0 pass, 1 failed certificate or bound, 2 config or usage error,
3 inconclusive (tainted run), 130 interrupted.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler

from .. import __version__
from ..config import config
from ..errors import (
    ConfigError,
    ErgolineError,
    ExprSyntaxError,
    SimulationConfigError,
)
from ..models.reports import VerdictStatus
from ..storage import ResultWriter
from .loader import config_hash, load_config
from .pipelines import run_audit, run_bound, run_certify, run_simulate, run_stationary, run_verify
from .reporter import ConsoleReporter

console = Console()

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3
EXIT_INTERRUPTED = 130

COMMANDS = ("certify", "bound", "verify", "stationary", "simulate", "audit")

VERDICT_EXIT = {
    VerdictStatus.PASS: EXIT_PASS,
    VerdictStatus.FAIL: EXIT_FAIL,
    VerdictStatus.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


def setup_logging(verbose: bool = False) -> None:
    """Configure logging with Rich handler."""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, rich_tracebacks=True)],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergoline",
        description="Drift certificates and coupling bounds for reflected Markov processes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  ergoline certify --config configs/jump_example.json
  ergoline verify --config configs/exponential_rate.json --threads 8
  ergoline stationary --config configs/stationary_half_drift.json --seed 3 --out results/half-drift

Threads default to ERGOLINE_THREADS (1 when unset).
        """,
    )
    parser.add_argument("--version", action="version", version=f"ergoline {__version__}")
    parser.add_argument("command", choices=COMMANDS, help="Pipeline to run")
    parser.add_argument("--config", required=True, type=Path, help="Experiment JSON file")
    parser.add_argument("--seed", type=int, help="Override sim.master_seed")
    parser.add_argument("--threads", type=int, help="Worker threads for path simulation")
    parser.add_argument("--out", type=Path, help="Output directory")
    parser.add_argument(
        "-v", "--verbose",
        action="store_true",
        help="Enable verbose logging",
    )
    return parser


def run_command(
    command: str,
    config_path: Path,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    out_dir: Optional[Path] = None,
    reporter: Optional[ConsoleReporter] = None,
) -> int:
    """Load the config, run one pipeline and return its exit code.

    Raises:
        ErgolineError: Any pipeline error; ``main`` maps these to exit codes
    """
    reporter = reporter or ConsoleReporter(console)
    cfg = load_config(config_path, seed=seed, out_dir=out_dir)
    digest = config_hash(cfg)
    target = cfg.output_dir or Path(config.output_dir) / cfg.name
    writer = ResultWriter(target, digest)
    threads = threads or config.threads
    logging.getLogger(__name__).info(
        f"{command} '{cfg.name}' (config-sha256 {digest[:12]}, threads={threads})"
    )

    if command == "certify":
        cert = run_certify(cfg, writer)
        reporter.certificate(cert)
        return EXIT_PASS if cert.passed else EXIT_FAIL
    if command == "bound":
        reporter.bound_rows(run_bound(cfg, writer))
        return EXIT_PASS
    if command == "verify":
        report = run_verify(cfg, writer, threads)
        reporter.bound_report(report)
        return VERDICT_EXIT[report.status]
    if command == "simulate":
        sample = run_simulate(cfg, writer, threads)
        reporter.coupled_sample(sample)
        return EXIT_INCONCLUSIVE if sample.tainted else EXIT_PASS
    if command == "audit":
        result = run_audit(cfg, writer, threads)
        reporter.audit(result)
        return EXIT_PASS if result.passed else EXIT_FAIL
    if command == "stationary":
        reporter.stationary(run_stationary(cfg, writer, threads))
        return EXIT_PASS
    raise ConfigError(f"unknown command '{command}'")


def exit_code_for(error: ErgolineError) -> int:
    if isinstance(error, (ConfigError, ExprSyntaxError, SimulationConfigError)):
        return EXIT_CONFIG
    return EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main entry point for CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(verbose=args.verbose)
    logger = logging.getLogger(__name__)

    if args.threads is not None and args.threads < 1:
        console.print("[red]--threads must be >= 1[/red]")
        sys.exit(EXIT_CONFIG)

    try:
        code = run_command(args.command, args.config, args.seed, args.threads, args.out)
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted[/yellow]")
        sys.exit(EXIT_INTERRUPTED)
    except ErgolineError as e:
        code = exit_code_for(e)
        if isinstance(e, ConfigError) and e.offset is not None:
            console.print(f"[red]{e}[/red] [dim](offset {e.offset})[/dim]")
        else:
            console.print(f"[red]{e}[/red]")
        if args.verbose:
            logger.exception("pipeline failed")
    sys.exit(code)


if __name__ == "__main__":
    main()
