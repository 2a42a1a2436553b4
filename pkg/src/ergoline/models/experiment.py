"""Experiment configuration: one JSON file per experiment.

Example config (reflected Brownian motion with drift -1):

    {
      "name": "exp-bm",
      "model": {"family": "diffusion", "drift": "-1", "sigma": "1"},
      "lyapunov": {"kind": "exp", "lam": 1.0},
      "phi": {"kind": "linear", "k": 0.5},
      "x1": 0.0, "x2": 2.0,
      "sim": {"dt": 0.001, "horizon": 4.0, "n_paths": 100000, "master_seed": 7},
      "checkpoints": [1.0, 2.0, 4.0]
    }
"""

from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from .lyapunov import LyapunovSpec
from .process import InitialLaw, LevyModel, ProcessModel, SimConfig
from .rates import ConstantPhi, CustomPhi, LinearPhi, PowerPhi
from .reports import GridSpec

DecompositionFamily = Literal[
    "exponential-exact",
    "power-young",
    "constant-young",
    "total-variation",
    "generic-young",
]


class FitRequest(BaseModel):
    """Ask the certifier for the best phi of a family instead of giving one."""

    kind: Literal["fit"] = "fit"
    family: Literal["linear", "power", "constant"] = "power"
    gamma: Optional[float] = Field(default=None, gt=0, lt=1)
    allow_tail_limited: bool = False

    model_config = {"frozen": True}


PhiChoice = Annotated[
    Union[LinearPhi, PowerPhi, ConstantPhi, CustomPhi, FitRequest],
    Field(discriminator="kind"),
]


class FeasibilityParams(BaseModel):
    """Drift envelope g(x) <= -a(1 + cx)^(alpha - 1) for a PowerAffine V."""

    a: float = Field(..., gt=0)
    c: float = Field(..., gt=0)
    sigma: float = Field(..., gt=0)
    beta: float = Field(..., gt=1)

    model_config = {"frozen": True}


class StationaryParams(BaseModel):
    burn_in: Optional[float] = Field(default=None, ge=0, description="Default horizon/2")
    thin: Optional[int] = Field(default=None, ge=1, description="Stride in steps")
    x0: float = Field(default=0.0, ge=0)
    histogram_bins: int = Field(default=50, ge=1)


class ExperimentConfig(BaseModel):
    """Everything one CLI run needs: model, certificate inputs, starts, simulation.

    Invariants checked here: point starts satisfy 0 <= x1 <= x2, starts are
    either both points or given through initial laws, checkpoints lie in
    [0, horizon]. Expressions are parsed on construction.
    """

    name: str = Field(default="experiment", min_length=1)
    model: ProcessModel
    lyapunov: Optional[LyapunovSpec] = Field(
        default=None, description="Omitted for Levy models: V = exp(lambda* x) is derived"
    )
    phi: Optional[PhiChoice] = Field(default=None, description='A phi spec or "fit"')
    young_p: float = Field(default=2.0, gt=1)
    decomposition: Optional[DecompositionFamily] = None
    grid: Optional[GridSpec] = None
    feasibility: Optional[FeasibilityParams] = None

    x1: Optional[float] = Field(default=None, ge=0)
    x2: Optional[float] = Field(default=None, ge=0)
    rho1: Optional[InitialLaw] = None
    rho2: Optional[InitialLaw] = None

    sim: Optional[SimConfig] = None
    checkpoints: list[float] = Field(default_factory=list)
    audit_x0: Optional[float] = Field(default=None, ge=0, description="Start of the K audit")
    stationary: StationaryParams = Field(default_factory=StationaryParams)

    bound_rate_multiplier: float = Field(
        default=1.0, gt=0, description="Scales the certified rate used for the bound only"
    )
    output_dir: Optional[Path] = None

    model_config = {"extra": "forbid"}

    @field_validator("phi", mode="before")
    @classmethod
    def _fit_shorthand(cls, value):
        if value == "fit":
            return {"kind": "fit"}
        return value

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        if self.x1 is not None and self.x2 is not None and self.x1 > self.x2:
            raise ValueError(f"x1 must not exceed x2, got ({self.x1}, {self.x2})")
        if (self.x1 is None) != (self.x2 is None):
            raise ValueError("give both x1 and x2, or neither")
        if (self.rho1 is None) != (self.rho2 is None):
            raise ValueError("give both rho1 and rho2, or neither")
        if self.x1 is not None and self.rho1 is not None:
            raise ValueError("give starts as points (x1, x2) or as laws (rho1, rho2)")
        if self.lyapunov is None and not isinstance(self.model, LevyModel):
            raise ValueError("lyapunov is required unless the model is a Levy model")
        if self.sim is not None:
            bad = [t for t in self.checkpoints if t < 0 or t > self.sim.horizon]
            if bad:
                raise ValueError(f"checkpoints {bad} outside [0, {self.sim.horizon}]")
        return self

    @property
    def has_starts(self) -> bool:
        return self.x1 is not None or self.rho1 is not None

    @property
    def uses_laws(self) -> bool:
        return self.rho1 is not None
