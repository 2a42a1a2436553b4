"""Experiment pipelines behind the CLI subcommands.

Each pipeline takes a validated ExperimentConfig and a ResultWriter, does
its computation through the analysis and simulation packages, writes its
files and returns the result object the runner turns into an exit code.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..analysis.certify import drift_check, fit_phi, levy_certificate, power_affine_feasible
from ..analysis.estimators import theoretical_bound, verify_bound, verify_bound_laws
from ..analysis.rate_calculus import ProductDecomposition, RateKernel, decompose, lemma_G_audit
from ..analysis.stationary import stationary_estimate
from ..config import config
from ..errors import ConfigError, PreconditionError
from ..models.experiment import ExperimentConfig, FitRequest
from ..models.lyapunov import PowerAffineV
from ..models.process import LevyModel, SimConfig
from ..models.rates import YoungPair, scaled_phi
from ..models.reports import (
    AuditReport,
    BoundReport,
    EmpiricalStationary,
    RateCertificate,
    SupermartingaleReport,
)
from ..simulation.coupling import CoupledSample, coupled_paths, supermartingale_audit, survival
from ..storage import ResultWriter, bound_plot

logger = logging.getLogger(__name__)

# Lemma G audit grid used by the ``audit`` subcommand
AUDIT_T_MAX = 10.0
AUDIT_U_MAX = 100.0
AUDIT_POINTS = 50


# =========================================================================
# Certificate and decomposition
# =========================================================================


def build_certificate(cfg: ExperimentConfig) -> RateCertificate:
    """Certificate for the configured (model, V, phi), fitting phi on request.

    Levy models without a Lyapunov function get V = exp(lambda* x) from the
    lambda search.

    Raises:
        ConfigError: If no phi is configured where one is needed
        FitError: If a requested fit has no admissible coefficient
    """
    model = cfg.model
    if cfg.lyapunov is None:
        cert = levy_certificate(model, cfg.grid)
    else:
        phi = cfg.phi
        if phi is None:
            raise ConfigError("phi is required: give a phi spec or \"fit\"")
        if isinstance(phi, FitRequest):
            phi = fit_phi(
                model,
                cfg.lyapunov,
                phi.family,
                cfg.grid,
                gamma=phi.gamma,
                allow_tail_limited=phi.allow_tail_limited,
            )
        cert = drift_check(model, cfg.lyapunov, phi, cfg.grid, model_id=cfg.name)

    if cfg.feasibility is not None:
        f = cfg.feasibility
        result = power_affine_feasible(f.a, f.c, f.sigma, f.beta)
        if result.nonempty:
            note = f"feasible lambda in [{result.lo:.6g}, {result.hi:.6g})"
            note += f", A(midpoint)={result.A_mid:.6g}"
        else:
            note = f"no feasible lambda: [{result.lo:.6g}, {result.hi:.6g}) is empty"
        V = cfg.lyapunov
        if isinstance(V, PowerAffineV):
            inside = result.nonempty and result.lo <= V.lam < result.hi
            note += f"; configured lambda={V.lam:g} {'inside' if inside else 'OUTSIDE'}"
            if not inside:
                logger.warning(f"{cfg.name}: {note}")
        cert.notes = cert.notes + [note]
    return cert


def build_decomposition(cfg: ExperimentConfig, cert: RateCertificate) -> ProductDecomposition:
    """h(t)U(x) <= G(t, V(x)) for the certified phi, scaled by bound_rate_multiplier."""
    phi = cert.phi
    if cfg.bound_rate_multiplier != 1.0:
        phi = scaled_phi(phi, cfg.bound_rate_multiplier)
        logger.info(
            f"bound uses {phi.describe()} (certified rate x{cfg.bound_rate_multiplier:g})"
        )
    kernel = RateKernel(phi, config.quad_rel_tol, config.root_rel_tol)
    return decompose(kernel, cert.lyapunov, YoungPair(p=cfg.young_p), cfg.decomposition)


def _require_sim(cfg: ExperimentConfig) -> SimConfig:
    if cfg.sim is None:
        raise ConfigError("this command needs a 'sim' section")
    return cfg.sim


def _require_checkpoints(cfg: ExperimentConfig) -> list[float]:
    if not cfg.checkpoints:
        raise ConfigError("this command needs 'checkpoints'")
    return cfg.checkpoints


def _require_passed(cert: RateCertificate) -> None:
    if not cert.passed:
        raise PreconditionError(
            "pipeline",
            f"certificate for {cert.model_id} failed (worst margin "
            f"{cert.worst_margin:.3e} at x={cert.worst_x:.4g})",
        )


# =========================================================================
# Pipelines
# =========================================================================


def run_certify(cfg: ExperimentConfig, writer: ResultWriter) -> RateCertificate:
    cert = build_certificate(cfg)
    writer.write_json("certificate.json", cert)
    if cert.drift_table:
        writer.write_csv(
            "drift_table.csv", ["x", "m"], [(row["x"], row["m"]) for row in cert.drift_table]
        )
    return cert


def run_bound(cfg: ExperimentConfig, writer: ResultWriter) -> list[tuple[float, float]]:
    """Bound curve 2 V(x2)/h(t) at the checkpoints (t = 0 included when listed)."""
    if cfg.x2 is None:
        raise ConfigError("bound needs a point start x2")
    t_grid = _require_checkpoints(cfg)
    cert = build_certificate(cfg)
    _require_passed(cert)
    decomp = build_decomposition(cfg, cert)
    values = np.asarray(theoretical_bound(decomp, cert.lyapunov, cfg.x2, np.asarray(t_grid)))
    rows = [(float(t), float(b)) for t, b in zip(t_grid, values)]
    writer.write_csv("bound.csv", ["t", "bound"], rows)
    return rows


def run_verify(
    cfg: ExperimentConfig, writer: ResultWriter, threads: Optional[int] = None
) -> BoundReport:
    """Certificate, decomposition, coupled run and bound report with CSV/JSON/SVG.

    A failing certificate stops the pipeline before any simulation.
    """
    if not cfg.has_starts:
        raise ConfigError("verify needs starts (x1, x2) or initial laws (rho1, rho2)")
    sim = _require_sim(cfg)
    t_grid = _require_checkpoints(cfg)
    cert = build_certificate(cfg)
    _require_passed(cert)
    decomp = build_decomposition(cfg, cert)
    if cfg.uses_laws:
        report = verify_bound_laws(
            cfg.model,
            cert,
            decomp,
            cfg.rho1,
            cfg.rho2,
            sim,
            t_grid,
            threads=threads,
            rate_multiplier=cfg.bound_rate_multiplier,
        )
    else:
        report = verify_bound(
            cfg.model,
            cert,
            decomp,
            cfg.x1,
            cfg.x2,
            sim,
            t_grid,
            threads=threads,
            rate_multiplier=cfg.bound_rate_multiplier,
        )
    writer.write_csv(
        "verify.csv",
        ["t", "empirical", "ci_lo", "ci_hi", "bound", "pass"],
        [(r.t, r.empirical, r.ci_lo, r.ci_hi, r.bound, r.passed) for r in report.rows],
    )
    writer.write_json("report.json", {"certificate": cert, "report": report})
    writer.write_svg("verify.svg", bound_plot(report, title=f"{cfg.name}: {report.status.value}"))
    return report


def run_simulate(
    cfg: ExperimentConfig, writer: ResultWriter, threads: Optional[int] = None
) -> CoupledSample:
    """Coupled run only: survival of the meeting time at every checkpoint."""
    if not cfg.has_starts:
        raise ConfigError("simulate needs starts (x1, x2) or initial laws (rho1, rho2)")
    sim = _require_sim(cfg)
    t_grid = _require_checkpoints(cfg)
    first = cfg.rho1 if cfg.uses_laws else cfg.x1
    second = cfg.rho2 if cfg.uses_laws else cfg.x2
    sample = coupled_paths(cfg.model, first, second, sim, t_grid, threads)
    rows = []
    early_hit = sample.hit_step < sample.meet_step
    for t, step in zip(sample.checkpoints, sample.checkpoint_steps):
        estimate, lo, hi = survival(sample, t)
        count = int(np.sum(early_hit & (sample.hit_step <= step)))
        rows.append((t, estimate, lo, hi, count))
    writer.write_csv(
        "simulate.csv", ["t", "survival", "ci_lo", "ci_hi", "hit_before_meet"], rows
    )
    writer.write_json(
        "simulate.json",
        {
            "n_paths": sample.n_paths,
            "order_violations": sample.order_violations,
            "hit_before_meet": sample.hit_before_meet,
            "initial_order_ok": sample.initial_order_ok,
            "taint": sample.taint,
        },
    )
    return sample


@dataclass
class AuditResult:
    lemma: AuditReport
    supermartingale: Optional[SupermartingaleReport]

    @property
    def passed(self) -> bool:
        ok = self.supermartingale is None or self.supermartingale.nonincreasing
        return self.lemma.passed and ok


def run_audit(
    cfg: ExperimentConfig, writer: ResultWriter, threads: Optional[int] = None
) -> AuditResult:
    """G audit for the certified phi, plus the K audit when a sim section exists."""
    cert = build_certificate(cfg)
    _require_passed(cert)
    kernel = RateKernel(cert.phi, config.quad_rel_tol, config.root_rel_tol)
    n = AUDIT_POINTS if kernel.closed_form else 12
    lemma = lemma_G_audit(
        kernel, np.linspace(0.0, AUDIT_T_MAX, n), np.linspace(1.0, AUDIT_U_MAX, n)
    )
    martingale = None
    x0 = cfg.audit_x0 if cfg.audit_x0 is not None else cfg.x2
    if cfg.sim is not None and x0 is not None:
        t_grid = sorted({0.0, *cfg.checkpoints})
        martingale = supermartingale_audit(
            cfg.model,
            cert.lyapunov,
            kernel,
            x0,
            cfg.sim,
            t_grid,
            threads,
            certificate=cert,
        )
        writer.write_csv(
            "supermartingale.csv",
            ["t", "mean", "se", "step_increase", "step_se", "ok"],
            [
                (r.t, r.mean, r.se, r.step_increase, r.step_se, r.ok)
                for r in martingale.rows
            ],
        )
    writer.write_json("audit.json", {"lemma_g": lemma, "supermartingale": martingale})
    return AuditResult(lemma=lemma, supermartingale=martingale)


def run_stationary(
    cfg: ExperimentConfig, writer: ResultWriter, threads: Optional[int] = None
) -> EmpiricalStationary:
    """Stationary sample, histogram CSV and (pi, V) estimate.

    A failing certificate is logged, not fatal: the sample is still useful,
    and the divergence diagnostic reports what the chains did.
    """
    sim = _require_sim(cfg)
    V = cfg.lyapunov
    if V is None and isinstance(cfg.model, LevyModel):
        V = build_certificate(cfg).lyapunov
    elif cfg.phi is not None:
        cert = build_certificate(cfg)
        if not cert.passed:
            logger.warning(f"{cfg.name}: certificate failed; ergodicity is not certified")
    params = cfg.stationary
    estimate = stationary_estimate(
        cfg.model,
        sim,
        burn_in=params.burn_in,
        thin=params.thin,
        V=V,
        x0=params.x0,
        threads=threads,
    )
    samples = estimate.sample_array()
    counts, edges = np.histogram(samples, bins=params.histogram_bins)
    widths = np.diff(edges)
    density = counts / (samples.size * np.where(widths > 0, widths, 1.0))
    writer.write_csv(
        "stationary.csv",
        ["bin_lo", "bin_hi", "count", "density"],
        [
            (float(edges[i]), float(edges[i + 1]), int(counts[i]), float(density[i]))
            for i in range(counts.size)
        ],
    )
    writer.write_json("stationary.json", estimate)
    return estimate
