"""
Seeded random streams and the replica worker pool

Every stream is a numpy Generator over the counter-based Philox bit
generator, keyed by (master seed, replica index, purpose). Replica results
therefore never depend on how work is scheduled across processes.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from typing import Any, Callable, Iterable, List

import numpy as np

logger = logging.getLogger(__name__)


class StreamPurpose(Enum):
    """Independent stream families drawn from one master seed"""
    TREE = 1
    GROWTH = 2
    SPINE = 3
    DISCRETE_SPINE = 4
    MIXING = 5
    CONCENTRATION = 6
    TOKEN_GAME = 7


def make_rng(seed: int, replica: int = 0,
             purpose: StreamPurpose = StreamPurpose.TREE) -> np.random.Generator:
    """
    Build the stream for one replica

    Args:
        seed (int): Master seed
        replica (int): Replica index
        purpose (StreamPurpose): Which experiment family consumes the stream

    Returns:
        numpy.random.Generator: Philox-backed generator
    """
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(replica, purpose.value))
    return np.random.Generator(np.random.Philox(sequence))


def run_replicas(task: Callable[..., Any], jobs: Iterable[tuple], threads: int = 1) -> List[Any]:
    """
    Run task(*job) for every job and return results in job order

    With threads > 1 the jobs go to a process pool; task must then be a
    module-level function.
    """
    jobs = list(jobs)
    if threads <= 1 or len(jobs) <= 1:
        return [task(*job) for job in jobs]

    logger.debug("dispatching %d replicas to %d workers", len(jobs), threads)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(task, *job) for job in jobs]
        return [future.result() for future in futures]
