"""Parametric Lyapunov function families.

Each family exposes V, V' and V'' in closed form so generators can be applied
without numerical differentiation. All families satisfy V >= 1 and are
nondecreasing on [0, inf).
"""

from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator


class Truncation(BaseModel):
    """Smoothing window (x1, x2) for V_hat = V(psi(x))."""

    x1: float = Field(..., gt=0)
    x2: float = Field(..., gt=0)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _ordered(self) -> "Truncation":
        if self.x1 >= self.x2:
            raise ValueError(f"truncation needs x1 < x2, got ({self.x1}, {self.x2})")
        return self


class LyapunovFunction(BaseModel):
    truncation: Optional[Truncation] = Field(
        default=None, description="Optional (x1, x2) window for V_hat = V o psi"
    )

    model_config = {"frozen": True}

    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        raise NotImplementedError

    def d1(self, x):
        raise NotImplementedError

    def d2(self, x):
        raise NotImplementedError


class AffineV(LyapunovFunction):
    """V(x) = 1 + c*x."""

    kind: Literal["affine"] = "affine"
    c: float = Field(..., gt=0)

    def value(self, x):
        return 1.0 + self.c * np.asarray(x, dtype=float)

    def d1(self, x):
        return self.c + 0.0 * np.asarray(x, dtype=float)

    def d2(self, x):
        return 0.0 * np.asarray(x, dtype=float)

    def describe(self) -> str:
        return f"V(x) = 1 + {self.c:g}*x"


class PowerAffineV(LyapunovFunction):
    """V(x) = (1 + lam*x)^beta with beta > 1."""

    kind: Literal["power_affine"] = "power_affine"
    lam: float = Field(..., gt=0)
    beta: float = Field(..., gt=1)

    def value(self, x):
        return np.power(1.0 + self.lam * np.asarray(x, dtype=float), self.beta)

    def d1(self, x):
        base = 1.0 + self.lam * np.asarray(x, dtype=float)
        return self.beta * self.lam * np.power(base, self.beta - 1.0)

    def d2(self, x):
        base = 1.0 + self.lam * np.asarray(x, dtype=float)
        return (
            self.lam**2 * self.beta * (self.beta - 1.0) * np.power(base, self.beta - 2.0)
        )

    def describe(self) -> str:
        return f"V(x) = (1 + {self.lam:g}*x)^{self.beta:g}"


class ExpV(LyapunovFunction):
    """V(x) = exp(lam*x)."""

    kind: Literal["exp"] = "exp"
    lam: float = Field(..., gt=0)

    def value(self, x):
        return np.exp(self.lam * np.asarray(x, dtype=float))

    def d1(self, x):
        return self.lam * self.value(x)

    def d2(self, x):
        return self.lam**2 * self.value(x)

    def describe(self) -> str:
        return f"V(x) = exp({self.lam:g}*x)"


class FracPowerV(LyapunovFunction):
    """V(x) = 1 + x^beta with beta in (0, 1); derivatives need x > 0."""

    kind: Literal["frac_power"] = "frac_power"
    beta: float = Field(..., gt=0, lt=1)

    def value(self, x):
        return 1.0 + np.power(np.asarray(x, dtype=float), self.beta)

    def d1(self, x):
        return self.beta * np.power(np.asarray(x, dtype=float), self.beta - 1.0)

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        return self.beta * (self.beta - 1.0) * np.power(x, self.beta - 2.0)

    def describe(self) -> str:
        return f"V(x) = 1 + x^{self.beta:g}"


LyapunovSpec = Annotated[
    Union[AffineV, PowerAffineV, ExpV, FracPowerV],
    Field(discriminator="kind"),
]
