"""Process models, jump laws, initial laws and simulation settings.

Three families of processes on [0, inf), all reflected at 0:

- DiffusionModel: dZ = g(Z)dt + sigma(Z)dW
- JumpDiffusionModel: a diffusion plus rightward jumps at intensity M
- LevyModel: constant drift and diffusion plus a nondecreasing jump part
  with spectral measure mu (finite or infinite activity)

Coefficient functions are expression strings compiled once on construction.
"""

from __future__ import annotations

import math
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, PrivateAttr, field_validator, model_validator
from scipy import integrate

from ..errors import ExprDomainError
from ..expr import Expr, parse


# Points where a diffusion coefficient must be nonnegative
SIGMA_CHECK_GRID = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 256)])


def _check_expr(value: str, variable: str = "x") -> str:
    parse(value, variable=variable)
    return value


# =========================================================================
# Displacement laws (probability laws of a single jump size, support >= 0)
# =========================================================================


class ExponentialLaw(BaseModel):
    """Exponential jump sizes with the given mean."""

    kind: Literal["exponential"] = "exponential"
    mean: float = Field(..., gt=0)

    model_config = {"frozen": True}

    @property
    def first_moment(self) -> float:
        return self.mean

    @property
    def exp_moment_sup(self) -> float:
        """Supremum of lambda with E[exp(lambda*Z)] < inf."""
        return 1.0 / self.mean

    def moment(self, beta: float) -> float:
        return math.gamma(1.0 + beta) * self.mean**beta

    def mgf(self, lam: float) -> float:
        if lam * self.mean >= 1.0:
            return math.inf
        return 1.0 / (1.0 - lam * self.mean)

    def inverse_cdf(self, u):
        return -self.mean * np.log1p(-np.asarray(u, dtype=float))

    def pdf(self, z):
        return np.exp(-np.asarray(z, dtype=float) / self.mean) / self.mean

    @property
    def support(self) -> tuple[float, float]:
        return 0.0, math.inf


class PointLaw(BaseModel):
    """Deterministic jump size."""

    kind: Literal["point"] = "point"
    value: float = Field(..., ge=0)

    model_config = {"frozen": True}

    @property
    def first_moment(self) -> float:
        return self.value

    @property
    def exp_moment_sup(self) -> float:
        return math.inf

    def moment(self, beta: float) -> float:
        return self.value**beta

    def mgf(self, lam: float) -> float:
        return math.exp(lam * self.value)

    def inverse_cdf(self, u):
        return np.full(np.shape(u), self.value) if np.ndim(u) else self.value

    @property
    def support(self) -> tuple[float, float]:
        return self.value, self.value


class UniformLaw(BaseModel):
    """Jump sizes uniform on [low, high]."""

    kind: Literal["uniform"] = "uniform"
    low: float = Field(..., ge=0)
    high: float = Field(..., gt=0)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _ordered(self) -> "UniformLaw":
        if self.low >= self.high:
            raise ValueError("uniform law needs low < high")
        return self

    @property
    def first_moment(self) -> float:
        return 0.5 * (self.low + self.high)

    @property
    def exp_moment_sup(self) -> float:
        return math.inf

    def moment(self, beta: float) -> float:
        a, b = self.low, self.high
        return (b ** (beta + 1) - a ** (beta + 1)) / ((beta + 1) * (b - a))

    def mgf(self, lam: float) -> float:
        if lam == 0:
            return 1.0
        a, b = self.low, self.high
        return (math.exp(lam * b) - math.exp(lam * a)) / (lam * (b - a))

    def inverse_cdf(self, u):
        return self.low + np.asarray(u, dtype=float) * (self.high - self.low)

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        inside = (z >= self.low) & (z <= self.high)
        return np.where(inside, 1.0 / (self.high - self.low), 0.0)

    @property
    def support(self) -> tuple[float, float]:
        return self.low, self.high


class ParetoLaw(BaseModel):
    """Pareto jump sizes on [scale, inf) with tail index alpha (no exp. moments)."""

    kind: Literal["pareto"] = "pareto"
    alpha: float = Field(..., gt=0)
    scale: float = Field(..., gt=0)

    model_config = {"frozen": True}

    @property
    def first_moment(self) -> float:
        if self.alpha <= 1:
            return math.inf
        return self.alpha * self.scale / (self.alpha - 1.0)

    @property
    def exp_moment_sup(self) -> float:
        return 0.0

    def moment(self, beta: float) -> float:
        if beta >= self.alpha:
            return math.inf
        return self.alpha * self.scale**beta / (self.alpha - beta)

    def mgf(self, lam: float) -> float:
        if lam > 0:
            return math.inf
        if lam == 0:
            return 1.0
        value, _ = integrate.quad(
            lambda z: math.exp(lam * z) * float(self.pdf(z)), self.scale, math.inf
        )
        return value

    def inverse_cdf(self, u):
        return self.scale * np.power(1.0 - np.asarray(u, dtype=float), -1.0 / self.alpha)

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        safe = np.maximum(z, self.scale)
        return np.where(
            z >= self.scale, self.alpha * self.scale**self.alpha / safe ** (self.alpha + 1), 0.0
        )

    @property
    def support(self) -> tuple[float, float]:
        return self.scale, math.inf


DisplacementLaw = Annotated[
    Union[ExponentialLaw, PointLaw, UniformLaw, ParetoLaw],
    Field(discriminator="kind"),
]


# =========================================================================
# Levy (spectral) measures on (0, inf)
# =========================================================================


class CompoundMeasure(BaseModel):
    """Finite measure: rate times a displacement law (compound Poisson jumps)."""

    kind: Literal["compound"] = "compound"
    rate: float = Field(..., ge=0, description="Total mass (jumps per unit time)")
    law: DisplacementLaw = Field(default_factory=lambda: PointLaw(value=1.0))

    model_config = {"frozen": True}

    @property
    def is_finite(self) -> bool:
        return True


class DensityMeasure(BaseModel):
    """Measure with a density in ``z`` on (0, inf), possibly of infinite mass."""

    kind: Literal["density"] = "density"
    density: str = Field(..., min_length=1, description="Expression in z")

    model_config = {"frozen": True}

    _expr: Expr = PrivateAttr()

    @field_validator("density")
    @classmethod
    def _parses(cls, value: str) -> str:
        return _check_expr(value, "z")

    def model_post_init(self, __context) -> None:
        self._expr = parse(self.density, variable="z")

    def __call__(self, z):
        return self._expr(z)

    @property
    def is_finite(self) -> bool:
        return False


LevyMeasureSpec = Annotated[
    Union[CompoundMeasure, DensityMeasure],
    Field(discriminator="kind"),
]


# =========================================================================
# Jump kernels for jump-diffusions
# =========================================================================


class ExpDisplacementKernel(BaseModel):
    """A jump from x lands at x + Exp(rate(x)), i.e. mean displacement 1/rate(x)."""

    kind: Literal["exp_displacement"] = "exp_displacement"
    rate: str = Field(..., min_length=1, description="Expression lambda(x) > 0")

    model_config = {"frozen": True}

    _expr: Expr = PrivateAttr()

    @field_validator("rate")
    @classmethod
    def _parses(cls, value: str) -> str:
        return _check_expr(value)

    def model_post_init(self, __context) -> None:
        self._expr = parse(self.rate)

    def rate_at(self, x):
        return self._expr(x)

    def displacement(self, u, x):
        """Inverse-CDF displacement for uniform u at state x."""
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate_at(x)


class TranslationKernel(BaseModel):
    """State-independent displacement law mu/M."""

    kind: Literal["translation"] = "translation"
    measure: CompoundMeasure

    model_config = {"frozen": True}

    def displacement(self, u, x):
        return self.measure.law.inverse_cdf(u)


JumpKernel = Annotated[
    Union[ExpDisplacementKernel, TranslationKernel],
    Field(discriminator="kind"),
]


# =========================================================================
# Process models
# =========================================================================


class DiffusionModel(BaseModel):
    """Reflected diffusion with drift g(x) and diffusion coefficient sigma(x)."""

    family: Literal["diffusion"] = "diffusion"
    name: str = Field(default="diffusion", description="Identifier used in reports")
    drift: str = Field(..., min_length=1, description="Expression g(x)")
    sigma: str = Field(default="0", min_length=1, description="Expression sigma(x) >= 0")

    model_config = {"frozen": True}

    _g: Expr = PrivateAttr()
    _sigma: Expr = PrivateAttr()

    @field_validator("drift", "sigma")
    @classmethod
    def _parses(cls, value: str) -> str:
        return _check_expr(value)

    @model_validator(mode="after")
    def _sigma_nonnegative(self) -> "DiffusionModel":
        sigma = parse(self.sigma)
        for x in SIGMA_CHECK_GRID:
            try:
                value = float(sigma(float(x)))
            except ExprDomainError:
                continue
            if value < 0:
                raise ValueError(f"sigma must be >= 0, sigma({x:g}) = {value:g}")
        return self

    def model_post_init(self, __context) -> None:
        self._g = parse(self.drift)
        self._sigma = parse(self.sigma)

    @property
    def g(self) -> Expr:
        return self._g

    @property
    def sigma_expr(self) -> Expr:
        return self._sigma

    def drift_at(self, x):
        return self._g(x)

    def sigma_at(self, x):
        return self._sigma(x)

    @property
    def constant_sigma(self) -> bool:
        return self._sigma.is_constant


class JumpDiffusionModel(BaseModel):
    """Reflected diffusion with rightward jumps at constant intensity M."""

    family: Literal["jump_diffusion"] = "jump_diffusion"
    name: str = Field(default="jump_diffusion")
    base: DiffusionModel
    intensity: float = Field(..., ge=0, description="Jump intensity M")
    kernel: JumpKernel

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _mass_matches(self) -> "JumpDiffusionModel":
        if isinstance(self.kernel, TranslationKernel):
            rate = self.kernel.measure.rate
            if not math.isclose(rate, self.intensity, rel_tol=1e-12, abs_tol=1e-15):
                raise ValueError(
                    f"translation kernel mass {rate} must equal intensity {self.intensity}"
                )
        return self

    def drift_at(self, x):
        return self.base.drift_at(x)

    def sigma_at(self, x):
        return self.base.sigma_at(x)

    @property
    def constant_sigma(self) -> bool:
        return self.base.constant_sigma


class LevyModel(BaseModel):
    """Reflected Levy process L = gt + sigma*W + J with nondecreasing J."""

    family: Literal["levy"] = "levy"
    name: str = Field(default="levy")
    drift: float = Field(..., description="Constant drift g")
    sigma: float = Field(default=0.0, ge=0)
    measure: LevyMeasureSpec = Field(default_factory=lambda: CompoundMeasure(rate=0.0))
    lambda0: Optional[float] = Field(
        default=None,
        gt=0,
        description="Bound with int_1^inf exp(lambda0*z) mu(dz) < inf, if known",
    )

    model_config = {"frozen": True}

    def drift_at(self, x):
        return self.drift + 0.0 * np.asarray(x, dtype=float)

    def sigma_at(self, x):
        return self.sigma + 0.0 * np.asarray(x, dtype=float)

    @property
    def constant_sigma(self) -> bool:
        return True


ProcessModel = Annotated[
    Union[DiffusionModel, JumpDiffusionModel, LevyModel],
    Field(discriminator="family"),
]


# =========================================================================
# Simulation setup
# =========================================================================


class SimConfig(BaseModel):
    """Time grid, path count and seed for a Monte Carlo run."""

    dt: float = Field(..., gt=0, description="Time step")
    horizon: float = Field(..., gt=0, description="Horizon T")
    n_paths: int = Field(..., ge=1)
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    epsilon: float = Field(
        default=1e-2, gt=0, description="Small-jump cutoff for infinite-activity measures"
    )

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _dt_within_horizon(self) -> "SimConfig":
        if self.dt > self.horizon:
            raise ValueError(f"dt={self.dt} exceeds horizon {self.horizon}")
        return self

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.horizon / self.dt - 1e-9))

    def step_of(self, t: float) -> int:
        """Index of the grid step closest to time t."""
        return int(round(t / self.dt))


class PointInitial(BaseModel):
    kind: Literal["point"] = "point"
    value: float = Field(..., ge=0)

    model_config = {"frozen": True}

    def inverse_cdf(self, u):
        return np.full(np.shape(u), self.value)


class ExponentialInitial(BaseModel):
    kind: Literal["exponential"] = "exponential"
    mean: float = Field(..., gt=0)

    model_config = {"frozen": True}

    def inverse_cdf(self, u):
        return -self.mean * np.log1p(-np.asarray(u, dtype=float))


class UniformInitial(BaseModel):
    kind: Literal["uniform"] = "uniform"
    low: float = Field(..., ge=0)
    high: float = Field(..., gt=0)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _ordered(self) -> "UniformInitial":
        if self.low >= self.high:
            raise ValueError(f"low must be < high, got [{self.low}, {self.high}]")
        return self

    def inverse_cdf(self, u):
        return self.low + np.asarray(u, dtype=float) * (self.high - self.low)


InitialLaw = Annotated[
    Union[PointInitial, ExponentialInitial, UniformInitial],
    Field(discriminator="kind"),
]
