"""Order-preserving fan-out of per-segment work over worker processes."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def default_jobs() -> int:
    return os.cpu_count() or 1


def ordered_map(func: Callable[[T], R], items: Sequence[T], jobs: Optional[int] = None) -> List[R]:
    """Apply ``func`` to every item, returning results in input order.

    ``func`` must be a picklable module-level callable. With one job (or at
    most one item) the work runs inline.

    Args:
        func: Pure per-item function
        items: Work items
        jobs: Worker processes (default: available cores)

    Returns:
        List of results aligned with ``items``
    """
    jobs = default_jobs() if jobs is None else jobs
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    if jobs == 1 or len(items) <= 1:
        return [func(item) for item in items]

    workers = min(jobs, len(items))
    chunksize = max(1, len(items) // (workers * 4))
    logger.debug(f"Processing {len(items)} items with {workers} workers (chunks of {chunksize})")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items, chunksize=chunksize))
