"""Drift-condition certification for reflected processes on [0, inf).

The generator of a reflected process acts on a Lyapunov function V as

    LV(x) = g(x)V'(x) + sigma(x)^2/2 V''(x) + (jump part)

for x > 0; the reflection only acts at 0 and V'(0) >= 0 keeps it harmless.
A certificate records that LV(x) <= -phi(V(x)) on an audit grid, which is
what the rate calculus needs to turn V into a convergence rate.

Example:
    model = DiffusionModel(drift="-2", sigma="1")
    cert = drift_check(model, AffineV(c=1.0), ConstantPhi(k=2.0))
    cert.passed   # True, margin 0 everywhere
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ..config import config
from ..errors import FitError, NonIntegrableError, PreconditionError
from ..expr.calculus import central_difference
from ..models.lyapunov import ExpV, FracPowerV, LyapunovFunction, PowerAffineV
from ..models.process import (
    CompoundMeasure,
    DiffusionModel,
    JumpDiffusionModel,
    LevyModel,
    TranslationKernel,
)
from ..models.rates import ConstantPhi, LinearPhi, PowerPhi
from ..models.reports import GridSpec, RateCertificate
from .jumps import (
    exponent_integral,
    kernel_jump_integral,
    levy_jump_integral,
    mean_jump,
    measure_moments,
)

logger = logging.getLogger(__name__)

GridLike = Union[GridSpec, Sequence[float], np.ndarray, None]

# States at which jump-diffusion certificates tabulate the average drift m(x).
DRIFT_TABLE_POINTS = (0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0)

# Exponents tried when fitting a power rate without a fixed gamma.
GAMMA_SCAN = tuple(round(0.05 * i, 10) for i in range(19, 0, -1))

BETA_CONDITION_NOTE = (
    "feasibility uses beta < 1 + 2a/(c*sigma^2), derived from lambda >= c and "
    "lambda < 2a/(sigma^2(beta - 1)); the form 1 + sigma^2/(2ac) is not equivalent "
    "and is not used"
)


def default_grid() -> GridSpec:
    return GridSpec(lo=config.grid_lo, hi=config.grid_hi, n=config.grid_points)


def resolve_grid(x_grid: GridLike, V: Optional[LyapunovFunction] = None) -> GridSpec:
    """GridSpec for an explicit point list, or the configured default grid.

    The default grid stops where an exponential V would overflow.
    """
    if x_grid is None:
        grid = default_grid()
        if isinstance(V, ExpV) and grid.hi * V.lam > 700.0:
            grid = GridSpec(lo=grid.lo, hi=700.0 / V.lam, n=grid.n)
        return grid
    if isinstance(x_grid, GridSpec):
        return x_grid
    return GridSpec.explicit(x_grid)


def model_name(model) -> str:
    return getattr(model, "name", model.family)


# =========================================================================
# Generator
# =========================================================================


def generator_apply(model, V: LyapunovFunction, x: float) -> float:
    """LV(x) for x > 0.

    Raises:
        PreconditionError: If x <= 0
        NonIntegrableError: If the jump integral diverges for this V
    """
    if x <= 0:
        raise PreconditionError("certify", f"generator needs x > 0, got {x!r}")
    drift = float(model.drift_at(x))
    sigma = float(model.sigma_at(x))
    value = drift * float(V.d1(x)) + 0.5 * sigma * sigma * float(V.d2(x))
    if isinstance(model, JumpDiffusionModel):
        value += kernel_jump_integral(model, V, x)
    elif isinstance(model, LevyModel):
        value += levy_jump_integral(model.measure, V, x)
    return value


def generator_values(model, V: LyapunovFunction, xs: np.ndarray) -> np.ndarray:
    """LV on an array of states; the local part is vectorized."""
    xs = np.asarray(xs, dtype=float)
    if np.any(xs <= 0):
        raise PreconditionError("certify", "generator needs every x > 0")
    drift = np.asarray(model.drift_at(xs), dtype=float)
    sigma = np.asarray(model.sigma_at(xs), dtype=float)
    values = drift * V.d1(xs) + 0.5 * sigma * sigma * V.d2(xs)
    if isinstance(model, JumpDiffusionModel):
        values = values + np.array([kernel_jump_integral(model, V, x) for x in xs])
    elif isinstance(model, LevyModel):
        values = values + np.array([levy_jump_integral(model.measure, V, x) for x in xs])
    return values


def mean_drift(model, x: float) -> float:
    """m(x) = g(x) + int (y - x) nu_x(dy), the average drift at x."""
    drift = float(model.drift_at(x))
    if isinstance(model, JumpDiffusionModel):
        return drift + mean_jump(model, x)
    if isinstance(model, LevyModel):
        return drift + measure_moments(model.measure).m1
    return drift


# =========================================================================
# Drift checks and fits
# =========================================================================


class DriftCertifier:
    """Evaluates LV once per grid and checks or fits phi against it.

    Example:
        certifier = DriftCertifier(model, PowerAffineV(lam=1.0, beta=2.0))
        phi = certifier.fit("power")
        cert = certifier.certify(phi)
    """

    def __init__(
        self,
        model,
        V: LyapunovFunction,
        x_grid: GridLike = None,
        tolerance: Optional[float] = None,
    ):
        self.model = model
        self.V = V
        self.grid = resolve_grid(x_grid, V)
        self.tolerance = config.drift_tolerance if tolerance is None else tolerance
        self.xs = self.grid.points()
        self.lv = generator_values(model, V, self.xs)
        self.v = np.asarray(V.value(self.xs), dtype=float)
        finite = np.isfinite(self.lv) & np.isfinite(self.v)
        if not np.all(finite):
            bad = float(self.xs[~finite][0])
            raise PreconditionError("certify", f"{V.describe()} overflows at x={bad:.4g}")

    def margins(self, phi) -> np.ndarray:
        """LV(x) + phi(V(x)) at every grid point."""
        return self.lv + np.asarray(phi(self.v), dtype=float)

    def certify(self, phi, model_id: Optional[str] = None) -> RateCertificate:
        margins = self.margins(phi)
        scale = np.abs(self.lv)
        relative = margins / np.maximum(scale, np.finfo(float).tiny)
        worst = int(np.argmax(margins))
        passed = bool(np.all(margins <= self.tolerance * scale))
        notes = [BETA_CONDITION_NOTE] if isinstance(self.V, PowerAffineV) else []
        drift_table = None
        if isinstance(self.model, JumpDiffusionModel):
            drift_table = [
                {"x": x, "m": mean_drift(self.model, x)}
                for x in DRIFT_TABLE_POINTS
                if x <= self.grid.hi
            ]
        cert = RateCertificate(
            model_id=model_id or model_name(self.model),
            lyapunov=self.V,
            phi=phi,
            grid=self.grid,
            worst_margin=float(margins[worst]),
            worst_x=float(self.xs[worst]),
            worst_relative_margin=float(np.max(relative)),
            tolerance=self.tolerance,
            passed=passed,
            notes=notes,
            drift_table=drift_table,
        )
        level = logging.INFO if passed else logging.WARNING
        logger.log(
            level,
            f"{cert.model_id}: {self.V.describe()} with {phi.describe()} "
            f"{'passes' if passed else 'fails'} (worst margin {cert.worst_margin:.3e} "
            f"at x={cert.worst_x:.4g})",
        )
        return cert

    def _coefficient(self, ratio: np.ndarray, label: str, allow_tail_limited: bool):
        """min(ratio), rejecting fits whose minimum sits at a still-falling right end."""
        index = int(np.argmin(ratio))
        coef = float(ratio[index])
        if not math.isfinite(coef) or coef <= 0:
            raise FitError(f"{label}: no positive coefficient on the grid (min {coef:.3e})")
        last = ratio.size - 1
        if index == last and last > 0 and ratio[last - 1] > ratio[last] * (1.0 + 1e-9):
            message = (
                f"{label}: minimum {coef:.4g} at the right end x={self.xs[last]:.4g} "
                "and still decreasing; a larger grid would shrink it"
            )
            if not allow_tail_limited:
                raise FitError(message)
            logger.warning(message)
        return coef

    def fit(
        self,
        family: str,
        gamma: Optional[float] = None,
        allow_tail_limited: bool = False,
    ):
        """Largest coefficient of the given phi family with LV <= -phi(V) on the grid.

        Args:
            family: "linear", "power" or "constant"
            gamma: Exponent for the power family; scanned from 0.95 down in
                steps of 0.05 when omitted (largest admissible gamma wins)
            allow_tail_limited: Accept coefficients limited by the grid end

        Raises:
            FitError: If no admissible positive coefficient exists
        """
        neg = -self.lv
        if family == "constant":
            return ConstantPhi(k=self._coefficient(neg, "constant fit", allow_tail_limited))
        if family == "linear":
            ratio = neg / self.v
            return LinearPhi(k=self._coefficient(ratio, "linear fit", allow_tail_limited))
        if family != "power":
            raise FitError(f"cannot fit phi family '{family}'")
        gammas = (gamma,) if gamma is not None else GAMMA_SCAN
        failures = []
        for g in gammas:
            ratio = neg / np.power(self.v, g)
            try:
                coef = self._coefficient(ratio, f"power fit gamma={g:g}", allow_tail_limited)
            except FitError as e:
                failures.append(e.message)
                continue
            logger.info(f"power fit: gamma={g:g}, c={coef:.6g}")
            return PowerPhi(c=coef, gamma=g)
        raise FitError(f"no admissible power rate ({failures[-1] if failures else 'empty scan'})")


def drift_check(
    model,
    V: LyapunovFunction,
    phi,
    x_grid: GridLike = None,
    model_id: Optional[str] = None,
    tolerance: Optional[float] = None,
) -> RateCertificate:
    """Certify LV(x) <= -phi(V(x)) on the grid (default 512 geometric points)."""
    return DriftCertifier(model, V, x_grid, tolerance).certify(phi, model_id)


def fit_phi(
    model,
    V: LyapunovFunction,
    family: str,
    x_grid: GridLike = None,
    gamma: Optional[float] = None,
    allow_tail_limited: bool = False,
):
    """Best admissible phi of a family; see DriftCertifier.fit."""
    return DriftCertifier(model, V, x_grid).fit(family, gamma, allow_tail_limited)


# =========================================================================
# Reflected Levy processes
# =========================================================================


def levy_k(model: LevyModel, lam: float) -> float:
    """k(lam) = lam*g + sigma^2 lam^2/2 + int (e^(lam z) - 1) mu(dz).

    Raises:
        PreconditionError: If lam >= lambda0 when lambda0 is given
        NonIntegrableError: If the exponential moment diverges
    """
    if model.lambda0 is not None and lam >= model.lambda0:
        raise PreconditionError("levy", f"lambda={lam:g} must be below lambda0={model.lambda0:g}")
    return lam * model.drift + 0.5 * model.sigma**2 * lam**2 + exponent_integral(
        model.measure, lam
    )


def levy_k_slope(model: LevyModel, step: float = 1e-4) -> float:
    """Numeric k'(0); equals g + m1."""
    return central_difference(lambda lam: levy_k(model, lam), 0.0, step, 1)


def _lambda_upper(model: LevyModel) -> tuple[float, bool]:
    """Right end of the lambda scan and whether it is an integrability bound."""
    if model.lambda0 is not None:
        return model.lambda0, True
    mu = model.measure
    if isinstance(mu, CompoundMeasure) and mu.rate > 0:
        sup = mu.law.exp_moment_sup
        if sup == 0.0:
            raise PreconditionError("levy", f"{mu.law.kind} jumps have no exponential moment")
        if math.isfinite(sup):
            return sup, True
    return config.lambda_cap, False


@dataclass(frozen=True)
class LambdaSearch:
    """Result of the lambda scan: k(lam) < 0 at lam."""

    lam: float
    k: float
    upper: float
    m1: float


def levy_find_lambda(model: LevyModel, n: Optional[int] = None) -> LambdaSearch:
    """Minimize k over a geometric grid in (0, lambda0).

    Raises:
        PreconditionError: If g >= -m1 (the process drifts away from 0)
        FitError: If no grid point has k < 0
    """
    m1 = measure_moments(model.measure).m1
    if not model.drift < -m1:
        raise PreconditionError(
            "levy", f"need g < -m1, got g={model.drift:g} and m1={m1:g}"
        )
    n = n or config.lambda_grid_points
    upper, exclusive = _lambda_upper(model)
    right = upper * (1.0 - 1e-6) if exclusive else upper
    grid = np.geomspace(upper * 1e-4, right, n)
    values = np.full(n, math.inf)
    for i, lam in enumerate(grid):
        try:
            values[i] = levy_k(model, float(lam))
        except NonIntegrableError:
            logger.debug(f"k({lam:g}) diverges; skipped")
    best = int(np.argmin(values))
    if not values[best] < 0:
        raise FitError(f"no lambda in (0, {upper:g}) with k(lambda) < 0")
    logger.info(f"levy lambda search: lambda*={grid[best]:.6g}, k={values[best]:.6g}")
    return LambdaSearch(lam=float(grid[best]), k=float(values[best]), upper=upper, m1=m1)


def levy_certificate(model: LevyModel, x_grid: GridLike = None) -> RateCertificate:
    """Certificate for V = exp(lam* x) with phi(s) = -k(lam*) s."""
    search = levy_find_lambda(model)
    V = ExpV(lam=search.lam)
    cert = drift_check(model, V, LinearPhi(k=-search.k), x_grid)
    cert.notes = cert.notes + [f"k(lambda*) = {search.k:.12g} at lambda* = {search.lam:.12g}"]
    return cert


# =========================================================================
# Parameter feasibility and heavy tails
# =========================================================================


@dataclass(frozen=True)
class FeasibilityResult:
    """Admissible lambda for V = (1 + lambda x)^beta under g(x) <= -a(1 + cx)^(alpha-1).

    Attributes:
        lo: Left end c of the interval
        hi: Right end 2a/(sigma^2(beta - 1)), excluded
        nonempty: beta < 1 + 2a/(c sigma^2)
        A_mid: A(lambda) = a beta lambda - sigma^2 beta (beta - 1) lambda^2 / 2 at
            the midpoint, None when the interval is empty
        note: Which form of the beta condition is used
    """

    lo: float
    hi: float
    nonempty: bool
    A_mid: Optional[float]
    note: str = BETA_CONDITION_NOTE

    @property
    def midpoint(self) -> Optional[float]:
        return 0.5 * (self.lo + self.hi) if self.nonempty else None


def power_affine_feasible(a: float, c: float, sigma: float, beta: float) -> FeasibilityResult:
    """Interval [c, 2a/(sigma^2(beta - 1))) of admissible lambda, possibly empty."""
    if beta <= 1:
        raise PreconditionError("feasible", f"beta must exceed 1, got {beta:g}")
    if a <= 0 or c <= 0 or sigma <= 0:
        raise PreconditionError("feasible", "a, c and sigma must be positive")
    hi = 2.0 * a / (sigma**2 * (beta - 1.0))
    nonempty = c < hi
    a_mid = None
    if nonempty:
        lam = 0.5 * (c + hi)
        a_mid = a * beta * lam - 0.5 * sigma**2 * beta * (beta - 1.0) * lam**2
    return FeasibilityResult(lo=c, hi=hi, nonempty=nonempty, A_mid=a_mid)


@dataclass(frozen=True)
class FracPowerBound:
    """Heavy-tail certificate data for V = 1 + x^beta.

    Attributes:
        drift_ok: g(x) <= -C x^(1-beta) on every grid point above x0
        worst: max over those points of g(x) + C x^(1-beta)
        m_beta: int z^beta mu(dz)
        phi: ConstantPhi(C - m_beta) when drift_ok and m_beta < C
    """

    beta: float
    C: float
    x0: float
    drift_ok: bool
    worst: float
    m_beta: float
    phi: Optional[ConstantPhi]


def frac_power_drift_bound(
    model, beta: float, C: float, x0: float, x_grid: GridLike = None
) -> FracPowerBound:
    """Check the fractional-power drift condition behind a bounded-phi certificate."""
    if isinstance(model, LevyModel):
        measure = model.measure
    elif isinstance(model, JumpDiffusionModel) and isinstance(model.kernel, TranslationKernel):
        measure = model.kernel.measure
    elif isinstance(model, DiffusionModel):
        measure = CompoundMeasure(rate=0.0)
    else:
        raise PreconditionError("certify", "fractional-power bound needs state-free jumps")
    V = FracPowerV(beta=beta)
    xs = resolve_grid(x_grid).points()
    xs = xs[xs >= x0]
    if xs.size == 0:
        raise PreconditionError("certify", f"no grid points above x0={x0:g}")
    excess = np.asarray(model.drift_at(xs), dtype=float) + C * np.power(xs, 1.0 - beta)
    worst = float(np.max(excess))
    m_beta = measure_moments(measure, beta=beta).m_beta
    drift_ok = worst <= 0.0
    phi = ConstantPhi(k=C - m_beta) if drift_ok and m_beta < C else None
    logger.info(
        f"{V.describe()}: drift {'ok' if drift_ok else 'fails'} above x0={x0:g}, "
        f"m_beta={m_beta:.6g}, C={C:g}"
    )
    return FracPowerBound(
        beta=beta, C=C, x0=x0, drift_ok=drift_ok, worst=worst, m_beta=m_beta, phi=phi
    )


# =========================================================================
# Truncated Lyapunov functions
# =========================================================================


@dataclass(frozen=True)
class TruncatedLyapunov:
    """V_hat = V(psi(x)) with psi = 0 on [0, x1], psi(x) = x on [x2, inf).

    On (x1, x2) psi is the cubic Hermite interpolant with psi' = 0 at x1 and
    psi' = 1 at x2; it is nondecreasing and stays below the identity.

    Attributes:
        C: max over the check grid of V / V_hat, so V_hat <= V <= C V_hat
    """

    V: LyapunovFunction
    x1: float
    x2: float
    C: float

    def psi(self, x):
        x_arr = np.asarray(x, dtype=float)
        width = self.x2 - self.x1
        s = np.clip((x_arr - self.x1) / width, 0.0, 1.0)
        middle = self.x2 * (3.0 * s**2 - 2.0 * s**3) + width * (s**3 - s**2)
        out = np.where(x_arr <= self.x1, 0.0, np.where(x_arr >= self.x2, x_arr, middle))
        return out if np.ndim(x) else float(out)

    def value(self, x):
        return self.V.value(self.psi(x))

    def __call__(self, x):
        return self.value(x)


def truncate(V: LyapunovFunction, x1: float, x2: float, n: int = 1000) -> TruncatedLyapunov:
    """Build V_hat = V o psi and measure the constant C in V <= C V_hat.

    Raises:
        PreconditionError: If not 0 < x1 < x2
    """
    if not 0 < x1 < x2:
        raise PreconditionError("truncate", f"need 0 < x1 < x2, got ({x1:g}, {x2:g})")
    unscaled = TruncatedLyapunov(V=V, x1=x1, x2=x2, C=math.inf)
    xs = np.linspace(0.0, x2, n)
    ratio = np.asarray(V.value(xs), dtype=float) / np.asarray(unscaled.value(xs), dtype=float)
    return TruncatedLyapunov(V=V, x1=x1, x2=x2, C=float(np.max(ratio)))
