"""Stationary-law estimates from many independent chains.

Chains start at x0, run past a burn-in (default: half the horizon) and are
recorded on a coarse stride. The integrated autocorrelation time of the
recorded series sets the thinning, and the effective sample size behind
every standard error.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional

import numpy as np

from ..models.lyapunov import LyapunovFunction
from ..models.process import SimConfig
from ..models.reports import EmpiricalStationary, StationaryDiagnostics
from ..simulation.chains import run_chains
from .certify import model_name

logger = logging.getLogger(__name__)

# Records per chain taken before autocorrelation-based thinning
PILOT_RECORDS = 1000

# Gap between half-sample means, in standard errors, that flags divergence
DIVERGENCE_Z = 4.0


def _autocov(chains: np.ndarray) -> np.ndarray:
    """Autocovariance of every row by FFT, lags 0..n-1."""
    n = chains.shape[1]
    centered = chains - chains.mean(axis=1, keepdims=True)
    size = 2 ** int(math.ceil(math.log2(2 * n)))
    spectrum = np.fft.rfft(centered, n=size, axis=1)
    acov = np.fft.irfft(spectrum * np.conjugate(spectrum), n=size, axis=1)[:, :n]
    return acov / n


def integrated_autocorrelation(chains: np.ndarray) -> float:
    """Integrated autocorrelation time of (chain, draw) data, >= 1 in practice.

    Autocorrelations pooled over chains are summed up to Geyer's initial
    positive sequence, then made monotone. Returns 1.0 for constant data.
    """
    chains = np.atleast_2d(np.asarray(chains, dtype=float))
    n_chain, n_draw = chains.shape
    if n_draw < 4:
        return 1.0
    acov = _autocov(chains)
    mean_var = np.mean(acov[:, 0]) * n_draw / (n_draw - 1.0)
    var_plus = mean_var * (n_draw - 1.0) / n_draw
    if n_chain > 1:
        var_plus += np.var(chains.mean(axis=1), ddof=1)
    if var_plus <= 0.0 or not np.isfinite(var_plus):
        return 1.0
    mean_acov = acov.mean(axis=0)

    rho = np.zeros(n_draw)
    rho[0] = 1.0
    rho[1] = 1.0 - (mean_var - mean_acov[1]) / var_plus
    even, odd = rho[0], rho[1]
    t = 1
    while t < n_draw - 2 and even + odd >= 0.0:
        even = 1.0 - (mean_var - mean_acov[t + 1]) / var_plus
        odd = 1.0 - (mean_var - mean_acov[t + 2]) / var_plus
        if even + odd >= 0.0:
            rho[t + 1], rho[t + 2] = even, odd
        t += 2
    max_t = t
    t = 1
    while t <= max_t - 2:
        if rho[t + 1] + rho[t + 2] > rho[t - 1] + rho[t]:
            rho[t + 1] = rho[t + 2] = (rho[t - 1] + rho[t]) / 2.0
        t += 2
    tau = -1.0 + 2.0 * float(np.sum(rho[: max_t + 1]))
    return max(tau, 1.0 / (n_chain * n_draw))


def _halves_diverge(values: np.ndarray, tau: float) -> bool:
    """Compare means over the first and second half of the recorded window."""
    half = values.shape[0] // 2
    if half < 2:
        return False
    first, second = values[:half], values[half:]
    n_eff = max(1.0, first.size / max(tau, 1.0))
    se = math.sqrt((np.var(first) + np.var(second)) / n_eff)
    gap = abs(float(np.mean(first)) - float(np.mean(second)))
    if se == 0.0:
        return gap > 1e-12 * max(1.0, abs(float(np.mean(second))))
    return gap > DIVERGENCE_Z * se


def stationary_estimate(
    model,
    sim: SimConfig,
    burn_in: Optional[float] = None,
    thin: Optional[int] = None,
    V: Optional[LyapunovFunction] = None,
    x0: float = 0.0,
    threads: Optional[int] = None,
    block_size: Optional[int] = None,
) -> EmpiricalStationary:
    """Harvest a stationary sample and estimate moments and (pi, V).

    Args:
        model: Process model, ideally with a passing certificate
        sim: dt, horizon, number of chains (n_paths) and seed
        burn_in: Time discarded per chain, default horizon / 2
        thin: Recording stride in steps; by default the stride is the pilot
            stride times the rounded-up autocorrelation time
        V: Lyapunov function for (pi, V); omitted when None
        x0: Start of every chain
        threads: Worker threads
        block_size: Chains per RNG block

    Returns:
        EmpiricalStationary with diagnostics; ``diverging`` is set when the
        two halves of the recorded window disagree on the mean of V (or of
        X without V)
    """
    burn_in = sim.horizon / 2.0 if burn_in is None else burn_in
    window = sim.n_steps - sim.step_of(burn_in)
    if thin is None:
        pilot = max(1, window // PILOT_RECORDS)
        records = run_chains(model, sim, burn_in, pilot, x0, threads, block_size)
        stride = max(1, int(math.ceil(integrated_autocorrelation(records.T))))
        thin_steps = pilot * stride
    else:
        records = run_chains(model, sim, burn_in, thin, x0, threads, block_size)
        stride = 1
        thin_steps = thin
    harvested = records[stride - 1 :: stride]

    tau = integrated_autocorrelation(harvested.T)
    n = harvested.size
    ess = n / tau
    mean = float(np.mean(harvested))
    mean_se = float(np.std(harvested) / math.sqrt(ess))
    pi_v = pi_v_se = None
    tracked = harvested
    if V is not None:
        v = np.asarray(V(harvested), dtype=float)
        pi_v = float(np.mean(v))
        pi_v_se = float(np.std(v) / math.sqrt(n / integrated_autocorrelation(v.T)))
        tracked = v
    diverging = _halves_diverge(tracked, tau)
    if diverging:
        logger.warning(
            f"{model_name(model)}: running mean still moving between the two halves of "
            f"the recorded window; moments may diverge"
        )

    result = EmpiricalStationary(
        model_id=model_name(model),
        lyapunov=V,
        n_samples=int(n),
        mean=mean,
        second_moment=float(np.mean(harvested**2)),
        pi_v=pi_v,
        pi_v_se=pi_v_se,
        mean_se=mean_se,
        diagnostics=StationaryDiagnostics(
            burn_in=burn_in,
            thin_steps=thin_steps,
            integrated_autocorrelation=tau,
            effective_sample_size=ess,
            n_chains=sim.n_paths,
            diverging=diverging,
        ),
        samples=harvested.ravel().tolist(),
    )
    logger.info(
        f"{result.model_id}: stationary mean {mean:.4f} +- {mean_se:.4f} "
        f"(ESS {ess:.0f}, stride {thin_steps} steps)"
    )
    return result


def stationary_expectation(sample: EmpiricalStationary, f: Callable) -> float:
    """Plug-in E_pi[f] over the harvested sample."""
    return float(np.mean(np.asarray(f(sample.sample_array()), dtype=float)))
