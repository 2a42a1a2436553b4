"""Serializable results: certificates, audits and bound reports."""

from __future__ import annotations

from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field, computed_field, model_validator

from .lyapunov import LyapunovSpec
from .rates import PhiSpec


class GridSpec(BaseModel):
    """Audit grid on (0, inf): geometric by default, or an explicit point list."""

    lo: float = Field(default=1e-3, gt=0)
    hi: float = Field(default=1e3, gt=0)
    n: int = Field(default=512, ge=1)
    spacing: str = Field(default="geometric", pattern="^(geometric|linear|explicit)$")
    values: Optional[list[float]] = Field(default=None, description="Explicit points")

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _ordered(self) -> "GridSpec":
        if self.spacing == "explicit":
            if not self.values:
                raise ValueError("explicit grid needs values")
            return self
        if self.lo >= self.hi:
            raise ValueError("grid needs lo < hi")
        return self

    @classmethod
    def explicit(cls, points) -> "GridSpec":
        values = [float(v) for v in np.asarray(points, dtype=float).ravel()]
        if not values:
            raise ValueError("explicit grid needs at least one point")
        return cls(
            lo=min(values), hi=max(values), n=len(values), spacing="explicit", values=values
        )

    def points(self) -> np.ndarray:
        if self.spacing == "explicit":
            return np.asarray(self.values, dtype=float)
        if self.spacing == "geometric":
            return np.geomspace(self.lo, self.hi, self.n)
        return np.linspace(self.lo, self.hi, self.n)


class VerdictStatus(str, Enum):
    """Outcome of a bound verification."""

    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


class RateCertificate(BaseModel):
    """Record that LV(x) <= -phi(V(x)) holds on an audit grid.

    ``worst_margin`` is max over the grid of LV(x) + phi(V(x)); the certificate
    passes when every margin is within ``tolerance`` relative to |LV(x)|.
    """

    model_id: str
    lyapunov: LyapunovSpec
    phi: PhiSpec
    grid: GridSpec
    worst_margin: float
    worst_x: float
    worst_relative_margin: float
    tolerance: float
    passed: bool
    assumptions: list[str] = Field(
        default_factory=lambda: ["positivity property P^t(x, B) > 0 assumed, not verified"]
    )
    notes: list[str] = Field(default_factory=list)
    drift_table: Optional[list[dict[str, float]]] = Field(
        default=None, description="Optional (x, m(x)) rows for jump-diffusions"
    )

    model_config = {"validate_assignment": True}


class AuditReport(BaseModel):
    """Numerical audit of G(t, u) = Psi(Phi(u) + t) on a (t, u) grid."""

    phi: PhiSpec
    t_range: tuple[float, float]
    u_range: tuple[float, float]
    shape: tuple[int, int]
    pde_residual: float = Field(..., description="max |G_t - phi(u) G_u| / max(1, |G_t|)")
    min_du: float = Field(..., description="min dG/du, must be >= -tol")
    max_duu: float = Field(..., description="max d2G/du2 relative to G, must be <= tol")
    boundary_t0: float = Field(..., description="max |G(0,u) - u| / u")
    boundary_u1: float = Field(..., description="max |G(t,1) - Psi(t)| / Psi(t)")
    residual_tol: float
    sign_tol: float
    boundary_tol: float

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return (
            self.pde_residual < self.residual_tol
            and self.min_du >= -self.sign_tol
            and self.max_duu <= self.sign_tol
            and self.boundary_t0 <= self.boundary_tol
            and self.boundary_u1 <= self.boundary_tol
        )


class BoundRow(BaseModel):
    """Empirical versus theoretical distance at one time."""

    t: float
    empirical: float
    ci_lo: float
    ci_hi: float
    bound: float
    passed: bool


class BoundReport(BaseModel):
    """Bound 2*V(x2)/h(t) against coupling estimates.

    Empirical values are coupling upper estimates of the U-norm distance,
    not unbiased estimates of the norm itself.
    """

    model_id: str
    x1: Optional[float] = None
    x2: Optional[float] = None
    decomposition: str
    weight: float = Field(..., description="V(x2) or (rho1 v rho2, V)")
    rows: list[BoundRow]
    order_violations: int = 0
    hit_before_meet: int = 0
    taint: list[str] = Field(default_factory=list)
    certificate_passed: bool = True
    rate_multiplier: float = 1.0
    status: VerdictStatus
    label: str = "coupling upper estimate of the U-norm distance"

    @computed_field  # type: ignore[prop-decorator]
    @property
    def tainted(self) -> bool:
        return bool(self.taint)


class StationaryDiagnostics(BaseModel):
    burn_in: float
    thin_steps: int
    integrated_autocorrelation: float
    effective_sample_size: float
    n_chains: int
    diverging: bool


class EmpiricalStationary(BaseModel):
    """Harvested stationary sample with (pi, V) and moment estimates."""

    model_id: str
    lyapunov: Optional[LyapunovSpec] = None
    n_samples: int
    mean: float
    second_moment: float
    pi_v: Optional[float] = None
    pi_v_se: Optional[float] = None
    mean_se: float
    diagnostics: StationaryDiagnostics
    samples: list[float] = Field(default_factory=list, exclude=True, repr=False)

    def sample_array(self) -> np.ndarray:
        return np.asarray(self.samples, dtype=float)


class SupermartingaleRow(BaseModel):
    t: float
    mean: float
    se: float
    step_increase: float = Field(..., description="mean K(t_i) - K(t_{i-1})")
    step_se: float
    ok: bool


class SupermartingaleReport(BaseModel):
    """Monte Carlo check that E[K(t)] is nonincreasing, K = G(t^tau, V(X(t^tau)))."""

    x0: float
    rows: list[SupermartingaleRow]
    taint: list[str] = Field(default_factory=list)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def nonincreasing(self) -> bool:
        return all(row.ok for row in self.rows)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def tainted(self) -> bool:
        return bool(self.taint)


def summary_dict(model: BaseModel) -> dict[str, Any]:
    """JSON-ready dict of a report."""
    return model.model_dump(mode="json")
