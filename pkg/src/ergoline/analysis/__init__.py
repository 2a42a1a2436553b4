"""Analysis: rate calculus, drift certification and jump integrals.

Estimators that need simulated paths live in ``ergoline.analysis.estimators``
and ``ergoline.analysis.stationary`` and are imported from there.
"""

from .certify import (
    DriftCertifier,
    FeasibilityResult,
    FracPowerBound,
    LambdaSearch,
    TruncatedLyapunov,
    drift_check,
    fit_phi,
    frac_power_drift_bound,
    generator_apply,
    levy_certificate,
    levy_find_lambda,
    levy_k,
    levy_k_slope,
    mean_drift,
    power_affine_feasible,
    truncate,
)
from .jumps import (
    MeasureMoments,
    exponent_integral,
    kernel_jump_integral,
    levy_jump_integral,
    measure_moments,
)
from .rate_calculus import (
    DECOMPOSITION_FAMILIES,
    ProductDecomposition,
    RateKernel,
    G_eval,
    G_generic,
    capital_phi,
    capital_psi,
    decompose,
    lemma_G_audit,
    phi_eval,
    young_check,
)

__all__ = [
    "DECOMPOSITION_FAMILIES",
    "DriftCertifier",
    "FeasibilityResult",
    "FracPowerBound",
    "G_eval",
    "G_generic",
    "LambdaSearch",
    "MeasureMoments",
    "ProductDecomposition",
    "RateKernel",
    "TruncatedLyapunov",
    "capital_phi",
    "capital_psi",
    "decompose",
    "drift_check",
    "exponent_integral",
    "fit_phi",
    "frac_power_drift_bound",
    "generator_apply",
    "kernel_jump_integral",
    "lemma_G_audit",
    "levy_certificate",
    "levy_find_lambda",
    "levy_jump_integral",
    "levy_k",
    "levy_k_slope",
    "mean_drift",
    "measure_moments",
    "phi_eval",
    "power_affine_feasible",
    "truncate",
    "young_check",
]
