"""Bounded worker pool for independent sweep elements."""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import structlog

logger = structlog.get_logger()

T = TypeVar("T")
R = TypeVar("R")


def pool_size(threads: int) -> int:
    return threads if threads > 0 else (os.cpu_count() or 1)


def run_pool(fn: Callable[[T], R], items: Iterable[T], threads: int = 0) -> list[R]:
    """Map fn over items; results keep input order, the first failure is re-raised"""
    items = list(items)
    workers = min(pool_size(threads), max(len(items), 1))
    if workers == 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(fn, item) for item in items]
        results = []
        for item, future in zip(items, futures):
            try:
                results.append(future.result())
            except Exception as e:
                logger.error("sweep_task_failed", item=repr(item), error=str(e))
                raise
    return results
