"""
Utility functions for graddens.
Contains shared helpers for retries, timing and worker sizing.
"""

import logging
import os
import timeit
from functools import wraps
from typing import Callable, Optional

from graddens.config import THREADS
from graddens.errors import ScanTooCoarseError

logger = logging.getLogger(__name__)


def retry_on_coarse_scan(max_retries: int = 3, factor: int = 4):
    """
    Decorator to retry a root search with a finer scan grid.

    The wrapped function must accept a ``scan_n`` keyword. Each time it
    raises ScanTooCoarseError the scan count is multiplied by ``factor``.

    Args:
        max_retries: Maximum number of attempts
        factor: Scan refinement factor between attempts

    Returns:
        Decorated function
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, scan_n: int, **kwargs):
            for attempt in range(max_retries):
                try:
                    return func(*args, scan_n=scan_n, **kwargs)
                except ScanTooCoarseError as e:
                    if attempt == max_retries - 1:
                        raise
                    logger.warning(
                        f"Scan grid too coarse (attempt {attempt + 1}/{max_retries}): {e}; "
                        f"retrying with scan_n={scan_n * factor}"
                    )
                    scan_n *= factor

        return wrapper
    return decorator


def best_of(func: Callable[[], object], reps: int) -> float:
    """
    Time a zero-argument callable and keep the fastest run.

    Args:
        func: Callable to time
        reps: Number of repetitions

    Returns:
        float: Minimum wall-clock seconds over the repetitions
    """
    timer = timeit.Timer(func)
    return min(timer.repeat(repeat=reps, number=1))


def format_seconds(dt: float) -> str:
    """Format a duration with a readable unit."""
    if abs(dt) >= 1.0:
        return "%.2f s" % dt
    if abs(dt) > 10e-3:
        return "%.1f ms" % (dt * 1e3)
    if abs(dt) > 10e-6:
        return "%.1f us" % (dt * 1e6)
    return "%.0f ns" % (dt * 1e9)


def worker_count(threads: Optional[int] = None) -> int:
    """
    Resolve the number of worker threads.

    Args:
        threads: Explicit cap; None falls back to GRADDENS_THREADS, 0 means auto

    Returns:
        int: Number of workers (at least 1)
    """
    if threads is None:
        threads = THREADS
    if threads <= 0:
        return max(1, os.cpu_count() or 1)
    return threads


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0
