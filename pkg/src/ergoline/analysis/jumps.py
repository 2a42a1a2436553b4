"""Jump integrals against Lyapunov functions and Levy measure moments.

Closed forms are used where the jump law and V allow it (affine V needs only
the mean displacement, exponential V needs the moment generating function);
everything else goes through adaptive quadrature with integration warnings
promoted to errors, so a divergent integral never comes back as a number.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from ..errors import NonIntegrableError, PreconditionError, QuadratureError
from ..models.lyapunov import AffineV, ExpV, LyapunovFunction
from ..models.process import (
    CompoundMeasure,
    DensityMeasure,
    ExpDisplacementKernel,
    ExponentialLaw,
    JumpDiffusionModel,
    ParetoLaw,
    PointLaw,
    UniformLaw,
)

logger = logging.getLogger(__name__)

JUMP_QUAD_REL_TOL = 1e-8


def quad_checked(
    f: Callable[[float], float],
    a: float,
    b: float,
    component: str = "certify",
    epsrel: float = JUMP_QUAD_REL_TOL,
    divergent: type[Exception] = QuadratureError,
) -> float:
    """integrate.quad with IntegrationWarning raised as an Ergoline error.

    Args:
        divergent: Exception class to raise; NonIntegrableError takes only a
            message, every other class also gets ``component``
    """
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=epsrel, limit=200)
        except integrate.IntegrationWarning as e:
            message = f"integral over [{a:g}, {b:g}] did not converge: {e}"
            if divergent is NonIntegrableError:
                raise NonIntegrableError(message) from e
            raise divergent(component, message) from e
    if not math.isfinite(value):
        raise NonIntegrableError(f"integral over [{a:g}, {b:g}] is not finite")
    return value


def _quad_or_inf(f: Callable[[float], float], a: float, b: float) -> float:
    try:
        return quad_checked(f, a, b, divergent=NonIntegrableError)
    except NonIntegrableError:
        return math.inf


# =========================================================================
# Displacement laws
# =========================================================================


def displacement_law_at(kernel, x: float):
    """Law of the jump size from state x."""
    if isinstance(kernel, ExpDisplacementKernel):
        rate = float(kernel.rate_at(x))
        if rate <= 0:
            raise PreconditionError("certify", f"jump rate lambda({x:g}) = {rate:g} <= 0")
        return ExponentialLaw(mean=1.0 / rate)
    return kernel.measure.law


def law_expectation(law, f: Callable[[float], float]) -> float:
    """E[f(D)] for a displacement law by quadrature (exact for point laws)."""
    if isinstance(law, PointLaw):
        return float(f(law.value))
    lo, hi = law.support

    def integrand(z: float) -> float:
        density = float(law.pdf(z))
        if density == 0.0:
            return 0.0
        return float(f(z)) * density

    if isinstance(law, UniformLaw):
        return quad_checked(integrand, lo, hi)
    return quad_checked(integrand, lo, hi, divergent=NonIntegrableError)


def expected_increment(V: LyapunovFunction, law, x: float) -> float:
    """E[V(x + D) - V(x)] for one jump of size D ~ law."""
    if isinstance(V, AffineV):
        mean = law.first_moment
        if not math.isfinite(mean):
            raise NonIntegrableError(f"{law.kind} jumps have no first moment for {V.describe()}")
        return V.c * mean
    if isinstance(V, ExpV):
        mgf = law.mgf(V.lam)
        if not math.isfinite(mgf):
            raise NonIntegrableError(
                f"{law.kind} jumps have no exponential moment of order {V.lam:g}"
            )
        return float(V.value(x)) * (mgf - 1.0)
    beta = V.beta
    if isinstance(law, ParetoLaw) and law.moment(beta) == math.inf:
        raise NonIntegrableError(
            f"pareto(alpha={law.alpha:g}) jumps have no moment of order {beta:g}"
        )
    base = float(V.value(x))
    return law_expectation(law, lambda z: float(V.value(x + z)) - base)


def kernel_jump_integral(model: JumpDiffusionModel, V: LyapunovFunction, x: float) -> float:
    """M * E[V(x + D) - V(x)], the jump part of LV(x) for a jump-diffusion."""
    if model.intensity == 0.0:
        return 0.0
    law = displacement_law_at(model.kernel, x)
    return model.intensity * expected_increment(V, law, x)


def mean_jump(model: JumpDiffusionModel, x: float) -> float:
    """M * E[D], the jump contribution to the average drift m(x)."""
    if model.intensity == 0.0:
        return 0.0
    law = displacement_law_at(model.kernel, x)
    mean = law.first_moment
    if not math.isfinite(mean):
        raise NonIntegrableError(f"{law.kind} jumps from x={x:g} have infinite mean")
    return model.intensity * mean


# =========================================================================
# Levy measures
# =========================================================================


def _density_integral(
    mu: DensityMeasure,
    f: Optional[Callable[[float], float]],
    exp_rate: Optional[float] = None,
) -> float:
    """int_0^inf f(z) mu(z) dz split at z = 1; non-finite terms are errors.

    With ``exp_rate`` set, f is ignored and the integrand is
    (e^(exp_rate*z) - 1) mu(z), evaluated in log-space so that far tails
    with a tiny density do not overflow.
    """

    def integrand(z: float) -> float:
        weight = float(mu(z))
        if weight == 0.0:
            return 0.0
        try:
            if exp_rate is None:
                value = float(f(z)) * weight
            elif exp_rate * z < 700.0:
                value = math.expm1(exp_rate * z) * weight
            else:
                value = math.exp(exp_rate * z + math.log(weight)) - weight
        except OverflowError:
            value = math.inf
        if not math.isfinite(value):
            raise NonIntegrableError(f"jump integrand is not finite at z={z:g}")
        return value

    near = quad_checked(integrand, 0.0, 1.0, divergent=NonIntegrableError)
    tail = quad_checked(integrand, 1.0, math.inf, divergent=NonIntegrableError)
    return near + tail


def levy_jump_integral(mu, V: LyapunovFunction, x: float) -> float:
    """int [V(x + z) - V(x)] mu(dz)."""
    if isinstance(mu, CompoundMeasure):
        if mu.rate == 0.0:
            return 0.0
        return mu.rate * expected_increment(V, mu.law, x)
    base = float(V.value(x))
    if isinstance(V, AffineV):
        return V.c * _density_integral(mu, lambda z: z)
    if isinstance(V, ExpV):
        return base * _density_integral(mu, None, exp_rate=V.lam)
    return _density_integral(mu, lambda z: float(V.value(x + z)) - base)


def exponent_integral(mu, lam: float) -> float:
    """int (e^(lam*z) - 1) mu(dz), the jump part of the Levy exponent k(lam)."""
    if isinstance(mu, CompoundMeasure):
        if mu.rate == 0.0:
            return 0.0
        mgf = mu.law.mgf(lam)
        if not math.isfinite(mgf):
            raise NonIntegrableError(f"jump law has no exponential moment of order {lam:g}")
        return mu.rate * (mgf - 1.0)
    return _density_integral(mu, None, exp_rate=lam)


@dataclass(frozen=True)
class MeasureMoments:
    """Summary of a Levy measure on (0, inf).

    Attributes:
        total_mass: mu((0, inf)), infinite for infinite-activity measures
        m1: int z mu(dz)
        m_beta: int z^beta mu(dz) for the requested beta
        beta: Order of m_beta
        finite_variation: int (1 ^ z) mu(dz) < inf
        exp_moment_ok: int_1^inf e^(lambda0*z) mu(dz) < inf, None if no lambda0
    """

    total_mass: float
    m1: float
    m_beta: float
    beta: float
    finite_variation: bool
    exp_moment_ok: Optional[bool] = None


def measure_moments(mu, beta: float = 0.5, lambda0: Optional[float] = None) -> MeasureMoments:
    """Mass, first and beta moments, and the integrability checks of mu."""
    if isinstance(mu, CompoundMeasure):
        law = mu.law
        exp_ok = None
        if lambda0 is not None:
            exp_ok = mu.rate == 0.0 or math.isfinite(law.mgf(lambda0))
        if mu.rate == 0.0:
            return MeasureMoments(0.0, 0.0, 0.0, beta, True, exp_ok)
        return MeasureMoments(
            total_mass=mu.rate,
            m1=mu.rate * law.first_moment,
            m_beta=mu.rate * law.moment(beta),
            beta=beta,
            finite_variation=True,
            exp_moment_ok=exp_ok,
        )

    def weighted(g: Callable[[float], float]) -> Callable[[float], float]:
        return lambda z: g(z) * float(mu(z))

    mass = _quad_or_inf(weighted(lambda z: 1.0), 0.0, 1.0) + _quad_or_inf(
        weighted(lambda z: 1.0), 1.0, math.inf
    )
    near_first = _quad_or_inf(weighted(lambda z: z), 0.0, 1.0)
    tail_mass = _quad_or_inf(weighted(lambda z: 1.0), 1.0, math.inf)
    m1 = near_first + _quad_or_inf(weighted(lambda z: z), 1.0, math.inf)
    m_beta = _quad_or_inf(weighted(lambda z: z**beta), 0.0, 1.0) + _quad_or_inf(
        weighted(lambda z: z**beta), 1.0, math.inf
    )
    exp_ok = None
    if lambda0 is not None:
        exp_ok = math.isfinite(
            _quad_or_inf(_safe_exp_weight(mu, lambda0), 1.0, math.inf)
        )
    moments = MeasureMoments(
        total_mass=mass,
        m1=m1,
        m_beta=m_beta,
        beta=beta,
        finite_variation=math.isfinite(near_first + tail_mass),
        exp_moment_ok=exp_ok,
    )
    logger.debug(f"measure moments: {moments}")
    return moments


def _safe_exp_weight(mu: DensityMeasure, lam: float) -> Callable[[float], float]:
    def integrand(z: float) -> float:
        weight = float(mu(z))
        if weight == 0.0:
            return 0.0
        try:
            return math.exp(lam * z + math.log(weight))
        except OverflowError:
            return math.inf

    return integrand


def first_moment(mu) -> float:
    return measure_moments(mu).m1


# =========================================================================
# Small and large jumps (simulation support)
# =========================================================================


def small_jump_mean(mu, epsilon: float) -> float:
    """int_0^epsilon z mu(dz); zero for compound measures (no truncation)."""
    if isinstance(mu, CompoundMeasure):
        return 0.0
    return quad_checked(lambda z: z * float(mu(z)), 0.0, epsilon, component="simulate")


def large_jump_mass(mu, epsilon: float) -> float:
    """mu([epsilon, inf)), the intensity of the simulated jumps."""
    if isinstance(mu, CompoundMeasure):
        return mu.rate
    return quad_checked(lambda z: float(mu(z)), epsilon, math.inf, component="simulate")


@dataclass(frozen=True)
class TabulatedJumpLaw:
    """Piecewise-linear inverse CDF of mu restricted to [epsilon, inf), normalized.

    Attributes:
        rate: mu([epsilon, inf))
        z: Increasing knots, z[0] = epsilon
        cumulative: mu([epsilon, z_i]) / rate at each knot, ending at 1
    """

    rate: float
    z: np.ndarray
    cumulative: np.ndarray

    def inverse_cdf(self, u):
        return np.interp(u, self.cumulative, self.z)


def tabulate_large_jumps(
    mu: DensityMeasure, epsilon: float, knots: int = 512, tail_tol: float = 1e-12
) -> TabulatedJumpLaw:
    """Tabulate the jumps of size >= epsilon for inverse-CDF sampling.

    The right end grows geometrically until the remaining tail mass is below
    ``tail_tol`` times the total; segment masses come from quadrature.
    """
    rate = large_jump_mass(mu, epsilon)
    if rate <= 0.0:
        raise PreconditionError("simulate", f"measure has no mass above epsilon={epsilon:g}")
    right = max(1.0, 2.0 * epsilon)
    while large_jump_mass(mu, right) > tail_tol * rate:
        right *= 2.0
    z = np.geomspace(epsilon, right, knots)
    masses = [
        quad_checked(lambda s: float(mu(s)), lo, hi, component="simulate")
        for lo, hi in zip(z[:-1], z[1:])
    ]
    cumulative = np.concatenate([[0.0], np.cumsum(masses)])
    cumulative /= cumulative[-1]
    logger.debug(f"tabulated {knots} jump knots on [{epsilon:g}, {right:g}], rate {rate:.6g}")
    return TabulatedJumpLaw(rate=rate, z=z, cumulative=cumulative)
