"""Order-preserving map over a thread pool sized by FOLCRIS_THREADS.

Results never depend on the thread count: each task is independent and the
output order is the input order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    raw = os.environ.get("FOLCRIS_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        return 1
    return max(1, k)


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    items = list(items)
    k = min(thread_count(), len(items))
    if k <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))
