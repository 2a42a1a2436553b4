"""Rate calculus: phi -> Phi -> Psi -> G and product decompositions of G.

Given a concave nondecreasing rate phi on [1, inf):

    Phi(s) = int_1^s du / phi(u)        (time to climb from 1 to s)
    Psi    = Phi^-1                     (Psi(0) = 1)
    G(t, u) = Psi(Phi(u) + t)

G solves dG/dt = phi(u) dG/du with G(0, u) = u and G(t, 1) = Psi(t); it is
nondecreasing and concave in u. A product decomposition h(t) * U(x) <=
G(t, V(x)) turns a phi-Lyapunov function into a convergence rate 1/h(t) in
the U-weighted norm.

Named families use closed forms. A custom phi goes through adaptive
quadrature (in log-space) and bracketed monotone root finding.

Example:
    kernel = RateKernel(PowerPhi(c=1.0, gamma=0.5))
    kernel.capital_phi(4.0)   # 2.0
    kernel.G(2.0, 4.0)        # (t/2 + sqrt(u))^2 = 9.0
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from ..config import config
from ..errors import DecompositionError, QuadratureError, RateDomainError
from ..expr.calculus import derivative
from ..models.lyapunov import LyapunovFunction
from ..models.rates import ConstantPhi, CustomPhi, LinearPhi, PowerPhi, YoungPair
from ..models.reports import AuditReport

logger = logging.getLogger(__name__)

DecompositionFamily = str
DECOMPOSITION_FAMILIES = (
    "exponential-exact",
    "power-young",
    "constant-young",
    "generic-young",
    "total-variation",
)

# Bracket growth for Psi root finding stops here; beyond it v is treated as
# unreachable (Phi(inf) finite in floating point).
_PSI_BRACKET_LIMIT = 1e300


def _vectorize(func: Callable[[float], float], value):
    if np.ndim(value):
        return np.vectorize(func, otypes=[float])(value)
    return func(float(value))


def _like(result, *inputs):
    """Plain float for scalar inputs, float array otherwise."""
    if any(np.ndim(v) for v in inputs):
        return np.asarray(result, dtype=float)
    return float(result)


@dataclass(frozen=True)
class RateKernel:
    """A validated phi with its derived calculus.

    Attributes:
        phi: The rate function spec
        quad_rel_tol: Relative tolerance of Phi quadrature (custom phi)
        root_rel_tol: Relative tolerance of Psi root finding (custom phi)
    """

    phi: LinearPhi | PowerPhi | ConstantPhi | CustomPhi
    quad_rel_tol: float = field(default_factory=lambda: config.quad_rel_tol)
    root_rel_tol: float = field(default_factory=lambda: config.root_rel_tol)

    @property
    def closed_form(self) -> bool:
        return not isinstance(self.phi, CustomPhi)

    @property
    def phi_domain_sup(self) -> float:
        """Phi(inf); infinite for every concave positive phi."""
        return math.inf

    @property
    def family(self) -> str:
        return self.phi.kind

    # =========================================================================
    # phi, Phi, Psi
    # =========================================================================

    def phi_eval(self, s):
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 1.0):
            raise RateDomainError(f"phi is defined on [1, inf), got s={s_arr.min()!r}")
        return _like(self.phi(s_arr), s)

    def capital_phi(self, s):
        """Phi(s) = int_1^s du/phi(u)."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 1.0):
            raise RateDomainError(f"Phi is defined on [1, inf), got s={s_arr.min()!r}")
        phi = self.phi
        if isinstance(phi, LinearPhi):
            return _like(np.log(s_arr) / phi.k, s)
        if isinstance(phi, PowerPhi):
            alpha = phi.alpha
            return _like((np.power(s_arr, alpha) - 1.0) / (phi.c * alpha), s)
        if isinstance(phi, ConstantPhi):
            return _like((s_arr - 1.0) / phi.k, s)
        return _vectorize(self._quad_phi, s)

    def capital_psi(self, v):
        """Psi(v), the unique s >= 1 with Phi(s) = v."""
        v_arr = np.asarray(v, dtype=float)
        if np.any(v_arr < 0.0):
            raise RateDomainError(f"Psi is defined on [0, inf), got v={v_arr.min()!r}")
        phi = self.phi
        if isinstance(phi, LinearPhi):
            return _like(np.exp(phi.k * v_arr), v)
        if isinstance(phi, PowerPhi):
            alpha = phi.alpha
            return _like(np.power(phi.c * alpha * v_arr + 1.0, 1.0 / alpha), v)
        if isinstance(phi, ConstantPhi):
            return _like(1.0 + phi.k * v_arr, v)
        return _vectorize(self._root_psi, v)

    def G(self, t, u):
        """G(t, u) = Psi(Phi(u) + t), closed form where available."""
        t_arr = np.asarray(t, dtype=float)
        u_arr = np.asarray(u, dtype=float)
        if np.any(t_arr < 0):
            raise RateDomainError("G needs t >= 0")
        if np.any(u_arr < 1.0):
            raise RateDomainError("G needs u >= 1")
        phi = self.phi
        if isinstance(phi, LinearPhi):
            out = u_arr * np.exp(phi.k * t_arr)
        elif isinstance(phi, PowerPhi):
            alpha = phi.alpha
            out = np.power(phi.c * alpha * t_arr + np.power(u_arr, alpha), 1.0 / alpha)
        elif isinstance(phi, ConstantPhi):
            out = u_arr + phi.k * t_arr
        else:
            return self.G_generic(t, u)
        return _like(out, t, u)

    def G_generic(self, t, u):
        """Psi(Phi(u) + t) by quadrature and root finding, whatever the family."""

        def single(tt: float, uu: float) -> float:
            return self._root_psi(self._quad_phi(uu) + tt)

        if np.ndim(t) or np.ndim(u):
            return np.vectorize(single, otypes=[float])(t, u)
        return single(float(t), float(u))

    # =========================================================================
    # Numerical Phi / Psi
    # =========================================================================

    def _quad_phi(self, s: float) -> float:
        if s < 1.0:
            raise RateDomainError(f"Phi is defined on [1, inf), got s={s!r}")
        if s == 1.0:
            return 0.0

        # Substituting u = e^w keeps the integrand smooth over many decades.
        def integrand(w: float) -> float:
            u = math.exp(w)
            return u / float(self.phi(u))

        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                value, _ = integrate.quad(
                    integrand,
                    0.0,
                    math.log(s),
                    epsabs=0.0,
                    epsrel=self.quad_rel_tol,
                    limit=200,
                )
            except integrate.IntegrationWarning as e:
                raise QuadratureError("rate", f"Phi({s:g}): {e}") from e
        return value

    def _root_psi(self, v: float) -> float:
        if v < 0.0:
            raise RateDomainError(f"Psi is defined on [0, Phi(inf)), got v={v!r}")
        if v == 0.0:
            return 1.0
        hi = 2.0
        while self._quad_phi(hi) < v:
            hi *= 4.0
            if hi > _PSI_BRACKET_LIMIT:
                raise RateDomainError(f"Psi({v:g}) exceeds the numerical range of Phi")
        lo = max(1.0, hi / 4.0) if hi > 2.0 else 1.0
        return optimize.brentq(
            lambda s: self._quad_phi(s) - v,
            lo,
            hi,
            xtol=1e-300,
            rtol=max(self.root_rel_tol * 1e-2, 4.0 * np.finfo(float).eps),
            maxiter=500,
        )


# =========================================================================
# Module-level operations
# =========================================================================


def phi_eval(spec, s):
    """phi(s) for s >= 1."""
    return RateKernel(spec).phi_eval(s)


def capital_phi(kernel: RateKernel, s):
    return kernel.capital_phi(s)


def capital_psi(kernel: RateKernel, v):
    return kernel.capital_psi(v)


def G_eval(kernel: RateKernel, t, u):
    return kernel.G(t, u)


def G_generic(kernel: RateKernel, t, u):
    return kernel.G_generic(t, u)


def lemma_G_audit(
    kernel: RateKernel,
    t_grid: Sequence[float],
    u_grid: Sequence[float],
    residual_tol: float = 1e-6,
    sign_tol: float = 1e-8,
    boundary_tol: float = 1e-10,
) -> AuditReport:
    """Audit the PDE, monotonicity, concavity and boundary values of G.

    Derivatives are Richardson-extrapolated finite differences with steps
    1e-3*max(1, t) and 1e-3*max(1, u); stencils switch to one-sided at t = 0
    and u = 1. Residuals and curvature are measured relative to the size of
    G so that large values (u*e^(kt) at t = 10) are judged fairly.
    """
    t_values = np.asarray(t_grid, dtype=float)
    u_values = np.asarray(u_grid, dtype=float)
    if t_values.size == 0 or u_values.size == 0:
        raise RateDomainError("audit grids must be nonempty")
    if np.any(t_values < 0) or np.any(u_values < 1):
        raise RateDomainError("audit grids need t >= 0 and u >= 1")

    pde_residual = 0.0
    min_du = math.inf
    max_duu = -math.inf
    for t in t_values:
        h_t = 1e-3 * max(1.0, t)
        for u in u_values:
            h_u = 1e-3 * max(1.0, u)
            g_value = float(kernel.G(t, u))
            g_t = derivative(lambda tt: float(kernel.G(tt, u)), t, h_t, 1, lower=0.0)
            g_u = derivative(lambda uu: float(kernel.G(t, uu)), u, h_u, 1, lower=1.0)
            g_uu = derivative(lambda uu: float(kernel.G(t, uu)), u, h_u, 2, lower=1.0)
            residual = abs(g_t - float(kernel.phi(u)) * g_u) / max(1.0, abs(g_t))
            pde_residual = max(pde_residual, residual)
            min_du = min(min_du, g_u)
            max_duu = max(max_duu, g_uu / max(1.0, g_value))

    boundary_t0 = float(np.max(np.abs(kernel.G(0.0, u_values) - u_values) / u_values))
    psi_t = np.asarray(kernel.capital_psi(t_values), dtype=float)
    boundary_u1 = float(np.max(np.abs(kernel.G(t_values, 1.0) - psi_t) / psi_t))

    report = AuditReport(
        phi=kernel.phi,
        t_range=(float(t_values.min()), float(t_values.max())),
        u_range=(float(u_values.min()), float(u_values.max())),
        shape=(t_values.size, u_values.size),
        pde_residual=pde_residual,
        min_du=min_du,
        max_duu=max_duu,
        boundary_t0=boundary_t0,
        boundary_u1=boundary_u1,
        residual_tol=residual_tol,
        sign_tol=sign_tol,
        boundary_tol=boundary_tol,
    )
    logger.info(
        f"G audit for {kernel.phi.describe()}: residual={pde_residual:.2e} "
        f"passed={report.passed}"
    )
    return report


def young_check(pair: YoungPair, x: float, y: float) -> bool:
    """(p*x)^(1/p) * (q*y)^(1/q) <= x + y (+1e-12)."""
    if x < 0 or y < 0:
        raise ValueError("young_check needs x, y >= 0")
    return float(pair.H_inv(x) * pair.K_inv(y)) <= x + y + 1e-12


# =========================================================================
# Product decompositions
# =========================================================================


@dataclass(frozen=True)
class ProductDecomposition:
    """h(t) * U(x) <= G(t, V(x)), audited on a grid.

    Attributes:
        h: Time factor, nondecreasing, h(t) > 0 for t > 0
        U: Space weight, nondecreasing, U >= 1 not required
        family: How the split was obtained
        pair: Young pair used, if any
        worst_slack: Minimum of (G - h*U)/max(1, G) over the audit grid
    """

    h: Callable[[np.ndarray | float], np.ndarray | float]
    U: Callable[[np.ndarray | float], np.ndarray | float]
    family: DecompositionFamily
    pair: Optional[YoungPair] = None
    worst_slack: float = 0.0

    def rate(self, t):
        """1/h(t); +inf where h(t) = 0."""
        h = np.asarray(self.h(t), dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(h > 0, 1.0 / np.where(h > 0, h, 1.0), math.inf)
        return out if np.ndim(t) else float(out)


def _require(phi, cls, family: str) -> None:
    if not isinstance(phi, cls):
        raise DecompositionError(f"{family} does not apply to a {phi.kind} phi")


def _split(kernel: RateKernel, V: LyapunovFunction, pair: YoungPair, family: str):
    phi = kernel.phi
    p, q = pair.p, pair.q
    if family == "exponential-exact":
        _require(phi, LinearPhi, family)
        k = phi.k

        def h_exp(t):
            return _like(np.exp(k * np.asarray(t, dtype=float)), t)

        return h_exp, V.value, None
    if family == "power-young":
        _require(phi, PowerPhi, family)
        c, alpha = phi.c, phi.alpha
        scale = q ** (1.0 / (q * alpha))

        def h_power(t):
            base = p * c * alpha * np.asarray(t, dtype=float)
            return _like(np.power(base, 1.0 / (alpha * p)), t)

        def u_power(x):
            return _like(scale * np.power(V.value(x), 1.0 / q), x)

        return h_power, u_power, pair
    if family == "constant-young":
        _require(phi, ConstantPhi, family)
        k = phi.k

        def h_const(t):
            return _like(np.power(p * k * np.asarray(t, dtype=float), 1.0 / p), t)

        def u_const(x):
            return _like(np.power(q * V.value(x), 1.0 / q), x)

        return h_const, u_const, pair
    if family == "total-variation":

        def h_tv(t):
            return _like(kernel.capital_psi(t), t)

        def u_tv(x):
            return _like(np.ones_like(np.asarray(x, dtype=float)), x)

        return h_tv, u_tv, None
    if family == "generic-young":

        def h_generic(t):
            psi = np.asarray(kernel.capital_psi(t), dtype=float)
            return _like(np.power(p * np.maximum(psi - 1.0, 0.0), 1.0 / p), t)

        def u_generic(x):
            return _like(np.power(q * V.value(x), 1.0 / q), x)

        return h_generic, u_generic, pair
    raise DecompositionError(f"unsupported decomposition family '{family}'")


def default_family(kernel: RateKernel) -> str:
    return {
        "linear": "exponential-exact",
        "power": "power-young",
        "constant": "constant-young",
    }.get(kernel.family, "generic-young")


def audit_decomposition(
    kernel: RateKernel,
    V: LyapunovFunction,
    h: Callable,
    U: Callable,
    t_grid: np.ndarray,
    x_grid: np.ndarray,
) -> float:
    """Minimum relative slack (G(t, V(x)) - h(t)U(x)) / max(1, G) on the grid."""
    tt, xx = np.meshgrid(t_grid, x_grid, indexing="ij")
    v = np.asarray(V.value(xx), dtype=float)
    g = np.asarray(kernel.G(tt, v), dtype=float)
    product = np.asarray(h(tt), dtype=float) * np.asarray(U(xx), dtype=float)
    return float(np.min((g - product) / np.maximum(1.0, g)))


def decompose(
    kernel: RateKernel,
    V: LyapunovFunction,
    pair: Optional[YoungPair] = None,
    family: Optional[str] = None,
    t_max: float = 20.0,
    x_max: float = 50.0,
    n: Optional[int] = None,
    tolerance: Optional[float] = None,
) -> ProductDecomposition:
    """Split G(t, V(x)) >= h(t) * U(x) and audit the split on an n x n grid.

    Args:
        kernel: Rate kernel of the certified phi
        V: Lyapunov function of the certificate
        pair: Young pair (p defaults to 2); ignored by exact and TV splits
        family: One of DECOMPOSITION_FAMILIES; defaults by phi family
        t_max: Right end of the audited time range [0, t_max]
        x_max: Right end of the audited state range [0, x_max]
        n: Points per audit axis; 50 for closed-form kernels, 12 for custom
            phi where every G evaluation is a quadrature plus a root find
        tolerance: Allowed negative slack, default ``config.audit_tolerance``

    Raises:
        DecompositionError: Unsupported family or failed grid audit
    """
    pair = pair or YoungPair()
    family = family or default_family(kernel)
    tolerance = config.audit_tolerance if tolerance is None else tolerance
    h, U, used_pair = _split(kernel, V, pair, family)
    if n is None:
        n = 50 if kernel.closed_form else 12

    t_grid = np.linspace(0.0, t_max, n)
    x_grid = np.linspace(0.0, x_max, n)
    worst = audit_decomposition(kernel, V, h, U, t_grid, x_grid)
    if worst < -tolerance:
        raise DecompositionError(f"{family} split fails h(t)U(x) <= G(t, V(x))", worst)
    logger.debug(f"{family} split audited on {n}x{n} grid, worst slack {worst:.3e}")
    return ProductDecomposition(
        h=h, U=U, family=family, pair=used_pair, worst_slack=worst
    )
