"""One-step simulation kernels for reflected processes.

Every step is an Euler increment followed by the discrete Skorokhod
recursion X_{n+1} = max(0, X_n + increment), whose pushed amount
max(0, -(X_n + increment)) accumulates the local time at 0.

The scalar functions (reflect_step, diffusion_increment, jump_events,
levy_increment, step) are the reference API; StepKernel applies the same
recipe to a whole block of paths at once and lets two coupled copies share
every random draw.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..analysis.jumps import small_jump_mean, tabulate_large_jumps
from ..models.process import CompoundMeasure, DiffusionModel, JumpDiffusionModel, LevyModel

logger = logging.getLogger(__name__)


def reflect_step(x, increment):
    """Return (max(0, x + increment), pushed amount) for floats or arrays."""
    moved = np.asarray(x, dtype=float) + np.asarray(increment, dtype=float)
    new = np.maximum(moved, 0.0)
    pushed = np.maximum(-moved, 0.0)
    if np.ndim(x) or np.ndim(increment):
        return new, pushed
    return float(new), float(pushed)


def diffusion_increment(model, x, dt: float, gauss):
    """g(x)*dt + sigma(x)*sqrt(dt)*gauss."""
    return model.drift_at(x) * dt + model.sigma_at(x) * math.sqrt(dt) * gauss


def jump_events(
    model: JumpDiffusionModel, x: float, dt: float, rng: np.random.Generator
) -> list[float]:
    """Displacements of the jumps in one step, each drawn at the current pre-jump state."""
    if model.intensity == 0.0:
        return []
    count = int(rng.poisson(model.intensity * dt))
    displacements = []
    state = x
    for _ in range(count):
        d = float(model.kernel.displacement(rng.random(), state))
        displacements.append(d)
        state += d
    return displacements


@dataclass(frozen=True)
class LevyJumpSource:
    """Simulated jumps of a Levy measure.

    Jumps of size >= epsilon form a compound Poisson stream; smaller jumps
    are replaced by their mean drift ``compensator`` (jumps are
    nondecreasing, so this is their expectation per unit time).
    """

    rate: float
    compensator: float
    inverse_cdf: Optional[Callable[[np.ndarray], np.ndarray]]

    @classmethod
    def build(cls, mu, epsilon: float) -> "LevyJumpSource":
        if isinstance(mu, CompoundMeasure):
            return cls(rate=mu.rate, compensator=0.0, inverse_cdf=mu.law.inverse_cdf)
        table = tabulate_large_jumps(mu, epsilon)
        compensator = small_jump_mean(mu, epsilon)
        logger.debug(
            f"levy jumps: rate {table.rate:.6g} above eps={epsilon:g}, "
            f"small-jump drift {compensator:.6g}"
        )
        return cls(rate=table.rate, compensator=compensator, inverse_cdf=table.inverse_cdf)

    def sample_sum(self, rng: np.random.Generator, dt: float) -> float:
        if self.rate == 0.0:
            return 0.0
        count = int(rng.poisson(self.rate * dt))
        if count == 0:
            return 0.0
        return float(np.sum(self.inverse_cdf(rng.random(count))))


def levy_increment(
    model: LevyModel,
    dt: float,
    rng: np.random.Generator,
    epsilon: float = 1e-2,
    jumps: Optional[LevyJumpSource] = None,
) -> float:
    """g*dt + sigma*sqrt(dt)*N + large jumps + dt * int_0^eps z mu(dz)."""
    source = jumps or LevyJumpSource.build(model.measure, epsilon)
    gauss = float(rng.standard_normal())
    return (
        model.drift * dt
        + model.sigma * math.sqrt(dt) * gauss
        + source.sample_sum(rng, dt)
        + dt * source.compensator
    )


def step(model, x: float, dt: float, rng: np.random.Generator, epsilon: float = 1e-2) -> float:
    """One reflected Euler step from x."""
    if isinstance(model, LevyModel):
        increment = levy_increment(model, dt, rng, epsilon)
    else:
        increment = diffusion_increment(model, x, dt, float(rng.standard_normal()))
        if isinstance(model, JumpDiffusionModel):
            increment += sum(jump_events(model, x, dt, rng))
    new, _ = reflect_step(x, increment)
    return new


# =========================================================================
# Vectorized kernel
# =========================================================================


@dataclass
class Noise:
    """Random draws of one step for a block, shared by coupled copies."""

    gauss: np.ndarray
    counts: Optional[np.ndarray] = None
    uniforms: Optional[np.ndarray] = None


class StepKernel:
    """Block version of ``step`` with the noise drawn separately from its use.

    Example:
        kernel = StepKernel(model, dt=1e-3)
        noise = kernel.draw(rng, n)
        x2, _ = kernel.advance(x2, noise)
        x1, _ = kernel.advance(x1, noise)   # same draws, own state
    """

    def __init__(self, model, dt: float, epsilon: float = 1e-2):
        self.model = model
        self.dt = dt
        self.sqrt_dt = math.sqrt(dt)
        self.levy: Optional[LevyJumpSource] = None
        if isinstance(model, LevyModel):
            self.levy = LevyJumpSource.build(model.measure, epsilon)
            self.jump_rate = self.levy.rate
        elif isinstance(model, JumpDiffusionModel):
            self.jump_rate = model.intensity
        elif isinstance(model, DiffusionModel):
            self.jump_rate = 0.0
        else:
            raise TypeError(f"unsupported model {type(model).__name__}")

    def draw(self, rng: np.random.Generator, n: int) -> Noise:
        gauss = rng.standard_normal(n)
        if self.jump_rate == 0.0:
            return Noise(gauss=gauss)
        counts = rng.poisson(self.jump_rate * self.dt, n)
        most = int(counts.max()) if n else 0
        uniforms = rng.random((n, most)) if most > 0 else None
        return Noise(gauss=gauss, counts=counts, uniforms=uniforms)

    def increment(self, x: np.ndarray, noise: Noise) -> np.ndarray:
        dt = self.dt
        if self.levy is not None:
            inc = (
                self.model.drift * dt
                + self.model.sigma * self.sqrt_dt * noise.gauss
                + dt * self.levy.compensator
            )
            if noise.uniforms is not None:
                sizes = self.levy.inverse_cdf(noise.uniforms)
                mask = np.arange(noise.uniforms.shape[1]) < noise.counts[:, None]
                inc = inc + np.sum(np.where(mask, sizes, 0.0), axis=1)
            return inc
        inc = self.model.drift_at(x) * dt + self.model.sigma_at(x) * self.sqrt_dt * noise.gauss
        if noise.uniforms is not None:
            state = x.copy()
            kernel = self.model.kernel
            for j in range(noise.uniforms.shape[1]):
                active = noise.counts > j
                state[active] += kernel.displacement(noise.uniforms[active, j], state[active])
            inc = inc + (state - x)
        return inc

    def advance(self, x: np.ndarray, noise: Noise) -> tuple[np.ndarray, np.ndarray]:
        """(new states, pushed amounts) for one step."""
        return reflect_step(x, self.increment(x, noise))
