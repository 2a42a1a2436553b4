"""Console summaries of pipeline results (Rich formatted)."""

import logging
import math
from typing import Optional

from rich.console import Console
from rich.table import Table

from ..models.reports import (
    BoundReport,
    EmpiricalStationary,
    RateCertificate,
    VerdictStatus,
)
from ..simulation.coupling import CoupledSample, survival
from ..storage import format_float
from .pipelines import AuditResult

logger = logging.getLogger(__name__)


def _short(value: float) -> str:
    return f"{value:.4g}" if math.isfinite(value) else format_float(value)


STATUS_STYLE = {
    VerdictStatus.PASS: "bold green",
    VerdictStatus.FAIL: "bold red",
    VerdictStatus.INCONCLUSIVE: "bold yellow",
}


class ConsoleReporter:
    """Print certificates, bound tables and estimates to a Rich console.

    Example:
        reporter = ConsoleReporter()
        reporter.certificate(cert)
        reporter.bound_report(report)
    """

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def _verdict(self, ok: bool) -> str:
        return "[green]pass[/green]" if ok else "[red]FAIL[/red]"

    def certificate(self, cert: RateCertificate) -> None:
        c = self.console
        c.print()
        c.print(f"[bold]Certificate: {cert.model_id}[/bold] {self._verdict(cert.passed)}")
        c.print(f"  {cert.lyapunov.describe()}")
        c.print(f"  {cert.phi.describe()}")
        c.print(
            f"  worst margin {cert.worst_margin:.3e} at x={cert.worst_x:.4g} "
            f"({cert.grid.n} grid points)"
        )
        for note in cert.assumptions + cert.notes:
            c.print(f"  [dim]{note}[/dim]")
        if cert.drift_table:
            table = Table(show_header=True, header_style="bold")
            table.add_column("x", justify="right")
            table.add_column("m(x)", justify="right")
            for row in cert.drift_table:
                table.add_row(f"{row['x']:g}", f"{row['m']:.8g}")
            c.print(table)

    def bound_rows(self, rows: list[tuple[float, float]]) -> None:
        table = Table(show_header=True, header_style="bold")
        table.add_column("t", justify="right")
        table.add_column("bound", justify="right")
        for t, bound in rows:
            table.add_row(f"{t:g}", format_float(bound))
        self.console.print(table)

    def bound_report(self, report: BoundReport) -> None:
        c = self.console
        style = STATUS_STYLE[report.status]
        c.print()
        c.print(f"[{style}]{report.status.value}[/{style}] {report.model_id} ({report.label})")
        table = Table(show_header=True, header_style="bold")
        table.add_column("t", justify="right")
        table.add_column("empirical", justify="right")
        table.add_column("95% CI", justify="right")
        table.add_column("bound", justify="right")
        table.add_column("", justify="center")
        for row in report.rows:
            table.add_row(
                f"{row.t:g}",
                f"{row.empirical:.4g}",
                f"[{row.ci_lo:.4g}, {row.ci_hi:.4g}]",
                _short(row.bound),
                self._verdict(row.passed),
            )
        c.print(table)
        for reason in report.taint:
            c.print(f"  [yellow]taint: {reason}[/yellow]")

    def coupled_sample(self, sample: CoupledSample) -> None:
        table = Table(show_header=True, header_style="bold")
        table.add_column("t", justify="right")
        table.add_column("P(tau_0 > t)", justify="right")
        table.add_column("95% CI", justify="right")
        for t in sample.checkpoints:
            estimate, lo, hi = survival(sample, t)
            table.add_row(f"{t:g}", f"{estimate:.4f}", f"[{lo:.4f}, {hi:.4f}]")
        self.console.print(table)
        self.console.print(
            f"  {sample.n_paths} paths, {sample.order_violations} order violations, "
            f"{sample.hit_before_meet} hit before meeting"
        )
        for reason in sample.taint:
            self.console.print(f"  [yellow]taint: {reason}[/yellow]")

    def audit(self, result: AuditResult) -> None:
        c = self.console
        lemma = result.lemma
        c.print()
        c.print(f"[bold]G audit[/bold] {self._verdict(lemma.passed)}")
        c.print(
            f"  residual {lemma.pde_residual:.2e}, min dG/du {lemma.min_du:.3e}, "
            f"max d2G/du2 {lemma.max_duu:.2e}, boundaries "
            f"{lemma.boundary_t0:.1e}/{lemma.boundary_u1:.1e}"
        )
        if result.supermartingale is None:
            return
        report = result.supermartingale
        c.print(
            f"[bold]E[K(t)] from x0={report.x0:g}[/bold] "
            f"{self._verdict(report.nonincreasing)}"
        )
        table = Table(show_header=True, header_style="bold")
        table.add_column("t", justify="right")
        table.add_column("E[K(t)]", justify="right")
        table.add_column("step change", justify="right")
        table.add_column("", justify="center")
        for row in report.rows:
            table.add_row(
                f"{row.t:g}",
                f"{row.mean:.5g} +- {row.se:.2g}",
                f"{row.step_increase:+.3g} +- {row.step_se:.2g}",
                self._verdict(row.ok),
            )
        c.print(table)
        for reason in report.taint:
            c.print(f"  [yellow]taint: {reason}[/yellow]")

    def stationary(self, estimate: EmpiricalStationary) -> None:
        c = self.console
        d = estimate.diagnostics
        c.print()
        c.print(f"[bold]Stationary estimate: {estimate.model_id}[/bold]")
        c.print(f"  mean {estimate.mean:.4f} +- {estimate.mean_se:.4f}")
        c.print(f"  second moment {estimate.second_moment:.4f}")
        if estimate.pi_v is not None:
            c.print(f"  (pi, V) {estimate.pi_v:.4f} +- {estimate.pi_v_se:.4f}")
        c.print(
            f"  [dim]{estimate.n_samples} samples from {d.n_chains} chains, "
            f"burn-in {d.burn_in:g}, stride {d.thin_steps} steps, "
            f"IAT {d.integrated_autocorrelation:.2f}, ESS {d.effective_sample_size:.0f}[/dim]"
        )
        if d.diverging:
            c.print("  [yellow]moments look divergent (running mean not settled)[/yellow]")
