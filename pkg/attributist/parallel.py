from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def default_jobs() -> int:
    """Number of workers used when `--jobs` is not given."""
    return os.cpu_count() or 1


def parallel_map(
    fn: Callable[[T], R], items: Iterable[T], jobs: Optional[int] = None
) -> list[R]:
    """
    Apply `fn` to every item and return the results in input order.

    :param :fn Pure function, called once per item
    :param :items The inputs
    :param :jobs Maximum number of worker threads; `1` runs inline,
        `None` uses `default_jobs()`
    """
    items = list(items)
    jobs = default_jobs() if jobs is None else jobs
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=min(jobs, len(items))) as executor:
        return list(executor.map(fn, items))
