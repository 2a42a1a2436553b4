"""Counter-based random streams and block scheduling.

Paths are simulated in blocks. Every block owns a Philox generator keyed by
(master seed, stream, block index), so the numbers a path sees depend only
on which block it belongs to and never on how blocks are spread over
threads. Results are always assembled in block order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Optional, TypeVar

import numpy as np

from ..config import config

logger = logging.getLogger(__name__)

T = TypeVar("T")


class Stream(IntEnum):
    """Independent random streams per purpose."""

    COUPLED = 0
    SINGLE = 1
    STATIONARY = 2
    INITIAL = 3


@dataclass(frozen=True)
class Block:
    index: int
    start: int
    stop: int

    @property
    def size(self) -> int:
        return self.stop - self.start


def block_generator(master_seed: int, stream: Stream, block_index: int) -> np.random.Generator:
    """Philox generator for one block; identical on every platform and schedule."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(int(stream), block_index))
    return np.random.Generator(np.random.Philox(seq))


def split_blocks(n_paths: int, block_size: Optional[int] = None) -> list[Block]:
    size = block_size or config.block_size
    return [
        Block(index=i, start=start, stop=min(start + size, n_paths))
        for i, start in enumerate(range(0, n_paths, size))
    ]


def run_blocks(
    work: Callable[[Block], T], blocks: list[Block], threads: Optional[int] = None
) -> list[T]:
    """Apply ``work`` to every block, in parallel when threads > 1, in block order."""
    threads = threads or config.threads
    if threads <= 1 or len(blocks) <= 1:
        results = []
        for block in blocks:
            results.append(work(block))
            logger.debug(f"block {block.index + 1}/{len(blocks)} done")
        return results
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(work, blocks))
    logger.debug(f"{len(blocks)} blocks done on {threads} threads")
    return results
