"""Empirical coupling distances against theoretical convergence bounds.

The empirical values here are coupling upper estimates of the U-norm
distance between the two time-t laws:

    ||P^t(x1, .) - P^t(x2, .)||_U <= E[(U(X1(t)) + U(X2(t))) 1{tau_0 > t}]

and the theoretical side is 2 V(x2) / h(t) for a product decomposition
h(t)U(x) <= G(t, V(x)) of a certified rate.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import PreconditionError
from ..models.lyapunov import LyapunovFunction
from ..models.process import SimConfig
from ..models.reports import BoundReport, BoundRow, RateCertificate, VerdictStatus
from ..simulation.coupling import Z95, CoupledSample, coupled_paths
from .certify import model_name
from .rate_calculus import ProductDecomposition

logger = logging.getLogger(__name__)


# =========================================================================
# Empirical side
# =========================================================================


def empirical_U_distance(
    sample: CoupledSample, U: Callable, t: float
) -> tuple[float, float, float]:
    """Mean of (U(X1(t)) + U(X2(t))) 1{tau_0 > t} with a normal 95% interval.

    Returns:
        (estimate, ci_lo, ci_hi); ci_lo is clipped at 0

    Raises:
        CheckpointError: If t is not a stored checkpoint
    """
    unmet = sample.unmet_at(t)
    weights = np.asarray(U(sample.x1_at(t)), dtype=float) + np.asarray(
        U(sample.x2_at(t)), dtype=float
    )
    values = np.where(unmet, weights, 0.0)
    n = values.size
    estimate = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return estimate, max(0.0, estimate - Z95 * se), estimate + Z95 * se


def stochastic_max_expectation(samples1, samples2, V: Callable) -> float:
    """(rho1 v rho2, V) for the stochastic maximum of two empirical laws.

    The maximum has survival max(S1, S2). With knots k_0 = 0 < k_1 < ... at
    the sample values the survival is constant on [k_j, k_{j+1}), so

        (rho, V) = V(0) + sum_j S(k_j) (V(k_{j+1}) - V(k_j)).

    Raises:
        PreconditionError: Empty or negative samples
    """
    a = np.sort(np.asarray(samples1, dtype=float).ravel())
    b = np.sort(np.asarray(samples2, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise PreconditionError("stochastic-max", "both samples must be nonempty")
    if a[0] < 0 or b[0] < 0:
        raise PreconditionError("stochastic-max", "samples must lie in [0, inf)")
    knots = np.unique(np.concatenate([[0.0], a, b]))
    s1 = 1.0 - np.searchsorted(a, knots, side="right") / a.size
    s2 = 1.0 - np.searchsorted(b, knots, side="right") / b.size
    s0 = np.maximum(s1, s2)
    v = np.asarray(V(knots), dtype=float)
    return float(v[0] + np.sum(s0[:-1] * np.diff(v)))


# =========================================================================
# Theoretical side
# =========================================================================


def theoretical_bound(decomp: ProductDecomposition, V: LyapunovFunction, x2: float, t):
    """2 V(x2) / h(t); +inf where h(t) = 0."""
    return theoretical_bound_law(decomp, float(V(x2)), t)


def theoretical_bound_law(decomp: ProductDecomposition, expectation: float, t):
    """2 (rho, V) / h(t) for an initial or stationary expectation (rho, V)."""
    rate = decomp.rate(t)
    if np.ndim(rate):
        return 2.0 * expectation * np.asarray(rate, dtype=float)
    return 2.0 * expectation * float(rate)


def levy_stationary_bound(k: float, V: Callable, x: float, pi_v: float, t):
    """(V(x) + (pi, V)) e^{k t} for a reflected Levy process with k(lambda) < 0.

    Raises:
        PreconditionError: If k >= 0
    """
    if k >= 0:
        raise PreconditionError("levy-bound", f"needs k(lambda) < 0, got {k}")
    t_arr = np.asarray(t, dtype=float)
    out = (float(V(x)) + pi_v) * np.exp(k * t_arr)
    return out if np.ndim(t) else float(out)


# =========================================================================
# Verification
# =========================================================================


def _require_certificate(cert: RateCertificate) -> None:
    if not cert.passed:
        raise PreconditionError(
            "verify",
            f"certificate for {cert.model_id} failed (worst margin {cert.worst_margin:.3e} "
            f"at x={cert.worst_x:.4g}); nothing to verify",
        )


def _report(
    sample: CoupledSample,
    decomp: ProductDecomposition,
    weight: float,
    t_grid: Sequence[float],
    model_id: str,
    rate_multiplier: float,
    x1: Optional[float] = None,
    x2: Optional[float] = None,
) -> BoundReport:
    rows = []
    for t in t_grid:
        estimate, lo, hi = empirical_U_distance(sample, decomp.U, t)
        bound = theoretical_bound_law(decomp, weight, t)
        rows.append(
            BoundRow(
                t=float(t),
                empirical=estimate,
                ci_lo=lo,
                ci_hi=hi,
                bound=bound,
                passed=lo <= bound,
            )
        )
    taint = list(sample.taint)
    if sample.hit_before_meet:
        taint.append(f"{sample.hit_before_meet} paths hit 0 before meeting")
    if taint:
        status = VerdictStatus.INCONCLUSIVE
    elif all(row.passed for row in rows):
        status = VerdictStatus.PASS
    else:
        status = VerdictStatus.FAIL
    report = BoundReport(
        model_id=model_id,
        x1=x1,
        x2=x2,
        decomposition=decomp.family,
        weight=weight,
        rows=rows,
        order_violations=sample.order_violations,
        hit_before_meet=sample.hit_before_meet,
        taint=taint,
        certificate_passed=True,
        rate_multiplier=rate_multiplier,
        status=status,
    )
    failing = [row.t for row in rows if not row.passed]
    if status is VerdictStatus.FAIL:
        logger.warning(f"{model_id}: bound violated at t={failing}")
    else:
        logger.info(f"{model_id}: bound verification {status.value}")
    return report


def verify_bound(
    model,
    cert: RateCertificate,
    decomp: ProductDecomposition,
    x1: float,
    x2: float,
    sim: SimConfig,
    t_grid: Sequence[float],
    threads: Optional[int] = None,
    block_size: Optional[int] = None,
    rate_multiplier: float = 1.0,
) -> BoundReport:
    """Run coupled paths from (x1, x2) and compare against 2 V(x2) / h(t).

    A row passes when the lower confidence limit of the empirical distance
    does not exceed the bound. The report is PASS only if every row passes
    and the run is untainted; tainted runs are INCONCLUSIVE.

    Raises:
        PreconditionError: If the certificate did not pass
        SimulationConfigError: If x1 > x2 or dt breaks the monotone step
    """
    _require_certificate(cert)
    sample = coupled_paths(model, x1, x2, sim, t_grid, threads, block_size)
    weight = float(cert.lyapunov(x2))
    return _report(
        sample,
        decomp,
        weight,
        t_grid,
        cert.model_id or model_name(model),
        rate_multiplier,
        x1=x1,
        x2=x2,
    )


def verify_bound_laws(
    model,
    cert: RateCertificate,
    decomp: ProductDecomposition,
    rho1,
    rho2,
    sim: SimConfig,
    t_grid: Sequence[float],
    threads: Optional[int] = None,
    block_size: Optional[int] = None,
    rate_multiplier: float = 1.0,
) -> BoundReport:
    """verify_bound for initial laws, against 2 (rho1 v rho2, V) / h(t).

    Initial states are comonotone draws X1(0) = F1^-1(u), X2(0) = F2^-1(u);
    the weight is the stochastic-max expectation of those draws. Laws that
    are not stochastically ordered make the report INCONCLUSIVE.
    """
    _require_certificate(cert)
    sample = coupled_paths(model, rho1, rho2, sim, t_grid, threads, block_size)
    weight = stochastic_max_expectation(sample.x1_start, sample.x2_start, cert.lyapunov)
    return _report(
        sample, decomp, weight, t_grid, cert.model_id or model_name(model), rate_multiplier
    )
