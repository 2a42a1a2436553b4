"""Shared-noise coupled simulation of two reflected copies.

Both copies see the same Gaussian increments, the same Poisson clocks and
the same uniforms fed to the jump displacement inverses; each applies them
at its own state. Once the copies meet they are fused and stay identical.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.stats import norm

from ..errors import (
    CheckpointError,
    ExprDomainError,
    PreconditionError,
    SimulationConfigError,
)
from ..models.lyapunov import LyapunovFunction
from ..models.process import LevyModel, SimConfig
from ..models.reports import RateCertificate, SupermartingaleReport, SupermartingaleRow
from .kernels import StepKernel
from .rng import Block, Stream, block_generator, run_blocks, split_blocks

logger = logging.getLogger(__name__)

# Grid used to estimate Lipschitz constants of g and sigma
LIPSCHITZ_GRID = np.concatenate([[0.0], np.geomspace(1e-4, 1e3, 4000)])

# Two-sided 95% normal quantile
Z95 = float(norm.ppf(0.975))

Start = Union[float, object]


# =========================================================================
# dt validation
# =========================================================================


def lipschitz_estimate(f, grid: np.ndarray = LIPSCHITZ_GRID) -> float:
    """Largest absolute difference quotient of f over consecutive grid points.

    Coefficients undefined at 0 (for example x^-0.5) are sampled on (0, inf).
    """
    try:
        values = np.asarray(f(grid), dtype=float)
    except ExprDomainError:
        grid = grid[grid > 0]
        values = np.asarray(f(grid), dtype=float)
    if values.ndim == 0:
        return 0.0
    slopes = np.abs(np.diff(values) / np.diff(grid))
    return float(np.max(slopes)) if slopes.size else 0.0


def validate_dt(model, dt: float) -> list[str]:
    """Check the step size against the drift and diffusion Lipschitz constants.

    A constant-sigma one-step map is monotone when dt*Lip(g) < 1, so
    violating that is an error. For state-dependent sigma the run is allowed
    but a taint message is returned when dt*Lip(g) + 6*sqrt(dt)*Lip(sigma) >= 1.

    Raises:
        SimulationConfigError: Constant sigma and dt*Lip(g) >= 1
    """
    if isinstance(model, LevyModel):
        return []
    lip_g = lipschitz_estimate(model.drift_at)
    if model.constant_sigma:
        if dt * lip_g >= 1.0:
            raise SimulationConfigError(
                f"dt={dt:g} breaks the monotone step: dt*Lip(g)={dt * lip_g:.4g} >= 1"
            )
        return []
    lip_sigma = lipschitz_estimate(model.sigma_at)
    score = dt * lip_g + 6.0 * math.sqrt(dt) * lip_sigma
    if score >= 1.0:
        message = (
            f"discretization warning: dt*Lip(g) + 6*sqrt(dt)*Lip(sigma) = {score:.4g} >= 1"
        )
        logger.warning(message)
        return [message]
    return []


# =========================================================================
# Coupled sample
# =========================================================================


@dataclass
class CoupledSample:
    """Per-path meeting and hitting steps plus states at the checkpoints.

    Steps are grid indices; ``never`` (n_steps + 1) encodes "not within the
    horizon". ``meet_time``/``hit_time`` convert to times with +inf.
    """

    dt: float
    n_steps: int
    checkpoints: tuple[float, ...]
    checkpoint_steps: tuple[int, ...]
    x1_states: np.ndarray
    x2_states: np.ndarray
    meet_step: np.ndarray
    hit_step: np.ndarray
    x1_start: np.ndarray
    x2_start: np.ndarray
    order_violations: int = 0
    initial_order_ok: bool = True
    taint: list[str] = field(default_factory=list)

    @property
    def never(self) -> int:
        return self.n_steps + 1

    @property
    def n_paths(self) -> int:
        return int(self.meet_step.size)

    @property
    def meet_time(self) -> np.ndarray:
        return np.where(self.meet_step >= self.never, np.inf, self.meet_step * self.dt)

    @property
    def hit_time(self) -> np.ndarray:
        return np.where(self.hit_step >= self.never, np.inf, self.hit_step * self.dt)

    @property
    def hit_before_meet(self) -> int:
        return int(np.sum(self.hit_step < self.meet_step))

    @property
    def tainted(self) -> bool:
        return bool(self.taint)

    def checkpoint_index(self, t: float) -> int:
        for i, stored in enumerate(self.checkpoints):
            if abs(stored - t) <= 1e-9 * max(1.0, abs(t)):
                return i
        raise CheckpointError(t, list(self.checkpoints))

    def x1_at(self, t: float) -> np.ndarray:
        return self.x1_states[self.checkpoint_index(t)]

    def x2_at(self, t: float) -> np.ndarray:
        return self.x2_states[self.checkpoint_index(t)]

    def unmet_at(self, t: float) -> np.ndarray:
        """Indicator of tau_0 > t for every path."""
        step = self.checkpoint_steps[self.checkpoint_index(t)]
        return self.meet_step > step


@dataclass
class _BlockResult:
    x1_states: np.ndarray
    x2_states: np.ndarray
    meet_step: np.ndarray
    hit_step: np.ndarray
    x1_start: np.ndarray
    x2_start: np.ndarray
    order_violations: int
    initial_swaps: int


def _is_law(start) -> bool:
    return hasattr(start, "inverse_cdf")


def _checkpoint_steps(sim: SimConfig, checkpoints: Sequence[float]) -> tuple[int, ...]:
    steps = []
    for t in checkpoints:
        if t < 0 or t > sim.horizon + 1e-9 * max(1.0, sim.horizon):
            raise CheckpointError(t, [0.0, sim.horizon])
        steps.append(min(sim.step_of(t), sim.n_steps))
    return tuple(steps)


def _initial_states(x1: Start, x2: Start, block: Block, seed: int):
    n = block.size
    if not (_is_law(x1) or _is_law(x2)):
        return np.full(n, float(x1)), np.full(n, float(x2)), 0
    u = block_generator(seed, Stream.INITIAL, block.index).random(n)
    first = x1.inverse_cdf(u) if _is_law(x1) else np.full(n, float(x1))
    second = x2.inverse_cdf(u) if _is_law(x2) else np.full(n, float(x2))
    swapped = first > second
    low = np.where(swapped, second, first)
    high = np.where(swapped, first, second)
    return low.astype(float), high.astype(float), int(np.sum(swapped))


def coupled_paths(
    model,
    x1: Start,
    x2: Start,
    sim: SimConfig,
    checkpoints: Sequence[float],
    threads: Optional[int] = None,
    block_size: Optional[int] = None,
) -> CoupledSample:
    """Simulate sim.n_paths coupled pairs started at x1 <= x2.

    Args:
        model: Diffusion, jump-diffusion or Levy model
        x1: Lower start, a point or an initial law with ``inverse_cdf``
        x2: Upper start, a point or an initial law
        sim: Step size, horizon, path count, master seed and Levy cutoff
        checkpoints: Times (<= horizon) at which both states are stored
        threads: Worker threads; results never depend on this
        block_size: Paths per RNG block

    Raises:
        SimulationConfigError: If point starts have x1 > x2, a start is
            negative, or dt breaks the monotone step
        CheckpointError: For checkpoints outside [0, horizon]
    """
    laws = _is_law(x1) or _is_law(x2)
    if not laws:
        if x1 < 0 or x2 < 0:
            raise SimulationConfigError(f"starts must be >= 0, got ({x1}, {x2})")
        if x1 > x2:
            raise SimulationConfigError(f"coupled starts need x1 <= x2, got ({x1}, {x2})")

    taint = validate_dt(model, sim.dt)
    kernel = StepKernel(model, sim.dt, sim.epsilon)
    steps = _checkpoint_steps(sim, checkpoints)
    n_steps = sim.n_steps
    never = n_steps + 1
    last_needed = max(steps, default=0)
    slot_of: dict[int, list[int]] = {}
    for i, s in enumerate(steps):
        slot_of.setdefault(s, []).append(i)

    def work(block: Block) -> _BlockResult:
        rng = block_generator(sim.master_seed, Stream.COUPLED, block.index)
        n = block.size
        a, b, swaps = _initial_states(x1, x2, block, sim.master_seed)
        start_a, start_b = a.copy(), b.copy()
        met = a == b
        meet_step = np.where(met, 0, never)
        hit_step = np.where(b == 0.0, 0, never)
        a_states = np.empty((len(steps), n))
        b_states = np.empty((len(steps), n))
        violations = 0

        for i in slot_of.get(0, []):
            a_states[i], b_states[i] = a, b
        for s in range(1, n_steps + 1):
            if s > last_needed and met.all() and (hit_step < never).all():
                break
            noise = kernel.draw(rng, n)
            b, _ = kernel.advance(b, noise)
            moved, _ = kernel.advance(a, noise)
            a = np.where(met, b, moved)
            live = ~met
            violations += int(np.sum(live & (a > b)))
            newly = live & (a == b)
            meet_step[newly] = s
            met |= newly
            hit_step[(hit_step == never) & (b == 0.0)] = s
            for i in slot_of.get(s, []):
                a_states[i], b_states[i] = a, b

        return _BlockResult(
            x1_states=a_states,
            x2_states=b_states,
            meet_step=meet_step,
            hit_step=hit_step,
            x1_start=start_a,
            x2_start=start_b,
            order_violations=violations,
            initial_swaps=swaps,
        )

    blocks = split_blocks(sim.n_paths, block_size)
    logger.info(f"coupled run: {sim.n_paths} paths, {n_steps} steps, {len(blocks)} blocks")
    results = run_blocks(work, blocks, threads)

    violations = sum(r.order_violations for r in results)
    swaps = sum(r.initial_swaps for r in results)
    if violations:
        message = f"order violations: {violations} path-steps with X1 > X2"
        logger.warning(message)
        taint.append(message)
    if swaps:
        message = f"initial laws not ordered: {swaps} comonotone draws had X1(0) > X2(0)"
        logger.warning(message)
        taint.append(message)

    sample = CoupledSample(
        dt=sim.dt,
        n_steps=n_steps,
        checkpoints=tuple(float(t) for t in checkpoints),
        checkpoint_steps=steps,
        x1_states=np.concatenate([r.x1_states for r in results], axis=1),
        x2_states=np.concatenate([r.x2_states for r in results], axis=1),
        meet_step=np.concatenate([r.meet_step for r in results]),
        hit_step=np.concatenate([r.hit_step for r in results]),
        x1_start=np.concatenate([r.x1_start for r in results]),
        x2_start=np.concatenate([r.x2_start for r in results]),
        order_violations=violations,
        initial_order_ok=swaps == 0,
        taint=taint,
    )
    if sample.hit_before_meet:
        logger.warning(f"{sample.hit_before_meet} paths hit 0 before meeting")
    return sample


# =========================================================================
# Survival
# =========================================================================


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    # center - half does not cancel exactly at the ends
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == n else min(1.0, center + half)
    return lo, hi


def survival(sample: CoupledSample, t: float) -> tuple[float, float, float]:
    """P(tau_0 > t) with a Wilson 95% interval."""
    unmet = int(np.sum(sample.unmet_at(t)))
    n = sample.n_paths
    lo, hi = wilson_interval(unmet, n)
    return unmet / n, lo, hi


# =========================================================================
# Supermartingale audit
# =========================================================================


def supermartingale_audit(
    model,
    V: LyapunovFunction,
    kernel,
    x0: float,
    sim: SimConfig,
    t_grid: Sequence[float],
    threads: Optional[int] = None,
    block_size: Optional[int] = None,
    certificate: Optional[RateCertificate] = None,
) -> SupermartingaleReport:
    """Estimate E[K(t)] for K(t) = G(t ^ tau, V(X(t ^ tau))) from a single copy.

    tau is the first time X hits 0; after it K is frozen at G(tau, V(0)).
    A grid point is ok when the mean increment since the previous point is
    at most two standard errors above zero. Step-size warnings from
    validate_dt are carried in the report as taint.

    Raises:
        PreconditionError: If x0 < 0, or if a given certificate failed
        CheckpointError: For grid times outside [0, horizon]
    """
    if x0 < 0:
        raise PreconditionError("supermartingale", f"x0 must be >= 0, got {x0}")
    if certificate is not None and not certificate.passed:
        raise PreconditionError(
            "supermartingale",
            f"certificate for {certificate.model_id} failed; K(t) is not a supermartingale",
        )
    taint = validate_dt(model, sim.dt)
    step_kernel = StepKernel(model, sim.dt, sim.epsilon)
    steps = _checkpoint_steps(sim, t_grid)
    last_needed = max(steps, default=0)
    slot_of: dict[int, list[int]] = {}
    for i, s in enumerate(steps):
        slot_of.setdefault(s, []).append(i)
    v_floor = float(V(0.0))

    def k_values(x: np.ndarray, hit: np.ndarray, s: int) -> np.ndarray:
        t_now = np.where(hit >= 0, hit * sim.dt, s * sim.dt)
        u = np.where(hit >= 0, v_floor, V(x))
        return np.asarray(kernel.G(t_now, np.maximum(u, 1.0)), dtype=float)

    def work(block: Block) -> np.ndarray:
        rng = block_generator(sim.master_seed, Stream.SINGLE, block.index)
        n = block.size
        x = np.full(n, float(x0))
        hit = np.where(x == 0.0, 0, -1)
        out = np.empty((len(steps), n))
        for i in slot_of.get(0, []):
            out[i] = k_values(x, hit, 0)
        for s in range(1, last_needed + 1):
            noise = step_kernel.draw(rng, n)
            moved, _ = step_kernel.advance(x, noise)
            x = np.where(hit >= 0, 0.0, moved)
            hit = np.where((hit < 0) & (x == 0.0), s, hit)
            for i in slot_of.get(s, []):
                out[i] = k_values(x, hit, s)
        return out

    blocks = split_blocks(sim.n_paths, block_size)
    values = np.concatenate(run_blocks(work, blocks, threads), axis=1)
    for message in taint:
        logger.warning(f"supermartingale audit: {message}")

    order = np.argsort(np.asarray(t_grid, dtype=float), kind="stable")
    rows = []
    previous: Optional[np.ndarray] = None
    n = values.shape[1]
    for i in order:
        k = values[i]
        mean = float(np.mean(k))
        se = float(np.std(k, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        if previous is None:
            increase, step_se, ok = 0.0, 0.0, True
        else:
            delta = k - previous
            increase = float(np.mean(delta))
            step_se = float(np.std(delta, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            ok = increase <= 2.0 * step_se + 1e-12 * max(1.0, abs(mean))
        rows.append(
            SupermartingaleRow(
                t=float(t_grid[i]),
                mean=mean,
                se=se,
                step_increase=increase,
                step_se=step_se,
                ok=ok,
            )
        )
        previous = k
    report = SupermartingaleReport(x0=x0, rows=rows, taint=taint)
    logger.info(
        f"supermartingale audit from x0={x0:g}: "
        f"{'nonincreasing' if report.nonincreasing else 'INCREASING'} within 2 SE"
    )
    return report


__all__ = [
    "CoupledSample",
    "coupled_paths",
    "lipschitz_estimate",
    "supermartingale_audit",
    "survival",
    "validate_dt",
    "wilson_interval",
]
