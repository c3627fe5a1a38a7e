"""
Block-parallel map for Monte Carlo loops.
Blocks are fixed before dispatch and results come back in block order,
so the worker count never changes a result.
"""
import logging
from multiprocessing import Pool
from typing import Callable, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_blocks(func: Callable[[T], R], tasks: Sequence[T], workers: int = 1) -> List[R]:
    """Apply `func` to every task; a process pool is used when workers > 1."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]

    processes = min(workers, len(tasks))
    logger.info("Dispatching %d blocks to %d workers", len(tasks), processes)
    with Pool(processes=processes) as pool:
        return pool.map(func, tasks)
