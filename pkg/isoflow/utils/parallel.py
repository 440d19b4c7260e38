"""
Bounded worker pool for embarrassingly parallel per-column work.

Results always come back in input order so reductions stay deterministic.
"""

from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from isoflow.config import settings

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """
    Apply ``func`` to every item, optionally on a thread pool.

    Args:
        func: Function to apply
        items: Inputs
        threads: Worker count (defaults to ``settings.threads``); 1 runs inline

    Returns:
        Results in input order
    """
    workers = threads or settings.threads
    if workers <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
