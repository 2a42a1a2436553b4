"""Independent long chains for stationary-law sampling."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from ..errors import SimulationConfigError
from ..models.process import SimConfig
from .coupling import validate_dt
from .kernels import StepKernel
from .rng import Block, Stream, block_generator, run_blocks, split_blocks

logger = logging.getLogger(__name__)


def run_chains(
    model,
    sim: SimConfig,
    burn_in: float,
    thin_steps: int = 1,
    x0: float = 0.0,
    threads: Optional[int] = None,
    block_size: Optional[int] = None,
) -> np.ndarray:
    """Simulate sim.n_paths chains from x0 and record every ``thin_steps`` after burn-in.

    Returns:
        Array of shape (records, chains); row i is the state at step
        burn_in_steps + (i + 1) * thin_steps.

    Raises:
        SimulationConfigError: If burn_in leaves nothing to record or
            thin_steps < 1
    """
    if thin_steps < 1:
        raise SimulationConfigError(f"thin_steps must be >= 1, got {thin_steps}")
    if x0 < 0:
        raise SimulationConfigError(f"x0 must be >= 0, got {x0}")
    burn_steps = sim.step_of(burn_in)
    n_records = (sim.n_steps - burn_steps) // thin_steps
    if burn_in < 0 or n_records < 1:
        raise SimulationConfigError(
            f"burn-in {burn_in:g} with stride {thin_steps} leaves no records "
            f"before the horizon {sim.horizon:g}"
        )
    for message in validate_dt(model, sim.dt):
        logger.warning(f"stationary chains: {message}")
    kernel = StepKernel(model, sim.dt, sim.epsilon)
    last = burn_steps + n_records * thin_steps

    def work(block: Block) -> np.ndarray:
        rng = block_generator(sim.master_seed, Stream.STATIONARY, block.index)
        x = np.full(block.size, float(x0))
        out = np.empty((n_records, block.size))
        for s in range(1, last + 1):
            x, _ = kernel.advance(x, kernel.draw(rng, block.size))
            offset = s - burn_steps
            if offset > 0 and offset % thin_steps == 0:
                out[offset // thin_steps - 1] = x
        return out

    blocks = split_blocks(sim.n_paths, block_size)
    logger.info(
        f"stationary chains: {sim.n_paths} chains, burn-in {burn_steps} steps, "
        f"{n_records} records every {thin_steps} steps"
    )
    return np.concatenate(run_blocks(work, blocks, threads), axis=1)
