"""Rate functions phi and Young exponent pairs.

phi is the concave nondecreasing rate in the drift condition
LV(x) <= -phi(V(x)). Named families have closed-form calculus; a custom phi
is an expression in ``s`` handled by quadrature and root finding.
"""

from __future__ import annotations

from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, Field, PrivateAttr, field_validator

from ..errors import ExprDomainError, RateDomainError
from ..expr import Expr, parse

PhiFamily = Literal["linear", "power", "constant", "custom"]


class LinearPhi(BaseModel):
    """phi(s) = k*s (exponential rates)."""

    kind: Literal["linear"] = "linear"
    k: float = Field(..., gt=0, description="Slope")

    model_config = {"frozen": True}

    def __call__(self, s):
        return self.k * np.asarray(s, dtype=float) if np.ndim(s) else self.k * s

    def describe(self) -> str:
        return f"phi(s) = {self.k:g}*s"


class PowerPhi(BaseModel):
    """phi(s) = c*s^gamma with gamma in (0, 1) (polynomial rates)."""

    kind: Literal["power"] = "power"
    c: float = Field(..., gt=0, description="Coefficient")
    gamma: float = Field(..., gt=0, lt=1, description="Exponent")

    model_config = {"frozen": True}

    @property
    def alpha(self) -> float:
        """1 - gamma, the exponent appearing in Phi and G."""
        return 1.0 - self.gamma

    def __call__(self, s):
        return self.c * np.power(s, self.gamma)

    def describe(self) -> str:
        return f"phi(s) = {self.c:g}*s^{self.gamma:g}"


class ConstantPhi(BaseModel):
    """phi(s) = k (bounded rate; G(t, u) = u + k*t)."""

    kind: Literal["constant"] = "constant"
    k: float = Field(..., gt=0, description="Level")

    model_config = {"frozen": True}

    def __call__(self, s):
        if np.ndim(s):
            return np.full(np.shape(s), self.k)
        return self.k

    def describe(self) -> str:
        return f"phi(s) = {self.k:g}"


class CustomPhi(BaseModel):
    """phi given as an expression in ``s``, validated on a geometric grid."""

    kind: Literal["custom"] = "custom"
    expression: str = Field(..., min_length=1, description="Expression in s")

    model_config = {"frozen": True}

    _expr: Expr = PrivateAttr()

    @field_validator("expression")
    @classmethod
    def _parses(cls, value: str) -> str:
        parse(value, variable="s")
        return value

    def model_post_init(self, __context) -> None:
        self._expr = parse(self.expression, variable="s")
        validate_shape(self)

    def __call__(self, s):
        return self._expr(s)

    def describe(self) -> str:
        return f"phi(s) = {self.expression}"


PhiSpec = Annotated[
    Union[LinearPhi, PowerPhi, ConstantPhi, CustomPhi],
    Field(discriminator="kind"),
]


def validate_shape(phi, lo: float = 1.0, hi: float = 1e6, n: int = 400) -> None:
    """Check phi > 0, nondecreasing and concave on a geometric grid.

    Raises:
        RateDomainError: If any property fails on the grid
    """
    grid = np.geomspace(lo, hi, n)
    try:
        values = np.asarray(phi(grid), dtype=float)
    except ExprDomainError as e:
        raise RateDomainError(f"phi is not evaluable on [1, 1e6]: {e.message}") from e
    scale = np.maximum(np.abs(values), 1.0)
    if np.any(values <= 0):
        raise RateDomainError("phi must be positive on [1, inf)")
    if np.any(np.diff(values) < -1e-12 * scale[1:]):
        raise RateDomainError("phi must be nondecreasing on [1, inf)")
    slopes = np.diff(values) / np.diff(grid)
    if np.any(np.diff(slopes) > 1e-9 * np.maximum(np.abs(slopes[1:]), 1e-12)):
        raise RateDomainError("phi must be concave on [1, inf)")


class YoungPair(BaseModel):
    """Conjugate exponents (p, q) with 1/p + 1/q = 1.

    H(x) = x^p/p and K(y) = y^q/q satisfy x*y <= H(x) + K(y) for x, y >= 0,
    equivalently (p*x)^(1/p) * (q*y)^(1/q) <= x + y.
    """

    p: float = Field(default=2.0, gt=1, description="Exponent of the time factor")

    model_config = {"frozen": True}

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    def H(self, x):
        return np.power(x, self.p) / self.p

    def K(self, y):
        return np.power(y, self.q) / self.q

    def H_inv(self, x):
        return np.power(self.p * np.asarray(x, dtype=float), 1.0 / self.p)

    def K_inv(self, y):
        return np.power(self.q * np.asarray(y, dtype=float), 1.0 / self.q)


def scaled_phi(phi, factor: float):
    """Return phi multiplied by ``factor`` (used to test deliberately wrong rates)."""
    if factor <= 0:
        raise RateDomainError(f"rate multiplier must be positive, got {factor}")
    if factor == 1.0:
        return phi
    if isinstance(phi, LinearPhi):
        return LinearPhi(k=phi.k * factor)
    if isinstance(phi, PowerPhi):
        return PowerPhi(c=phi.c * factor, gamma=phi.gamma)
    if isinstance(phi, ConstantPhi):
        return ConstantPhi(k=phi.k * factor)
    return CustomPhi(expression=f"{factor!r}*({phi.expression})")
