"""Reflected-process simulation: RNG streams, step kernels, coupled runs."""

from .chains import run_chains
from .coupling import (
    CoupledSample,
    coupled_paths,
    lipschitz_estimate,
    supermartingale_audit,
    survival,
    validate_dt,
    wilson_interval,
)
from .kernels import (
    LevyJumpSource,
    Noise,
    StepKernel,
    diffusion_increment,
    jump_events,
    levy_increment,
    reflect_step,
    step,
)
from .rng import Block, Stream, block_generator, run_blocks, split_blocks

__all__ = [
    "Block",
    "CoupledSample",
    "LevyJumpSource",
    "Noise",
    "StepKernel",
    "Stream",
    "block_generator",
    "coupled_paths",
    "diffusion_increment",
    "jump_events",
    "levy_increment",
    "lipschitz_estimate",
    "reflect_step",
    "run_blocks",
    "run_chains",
    "split_blocks",
    "step",
    "supermartingale_audit",
    "survival",
    "validate_dt",
    "wilson_interval",
]
