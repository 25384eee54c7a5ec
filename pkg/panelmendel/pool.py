import collections
import concurrent.futures
import os
from typing import Callable, Deque, Iterable, Iterator, Optional, TypeVar

Item = TypeVar("Item")
Result = TypeVar("Result")

THREADS_ENV = "PANEL_MENDEL_THREADS"


def worker_count(configured: Optional[int] = None) -> int:
    """Configured value, else PANEL_MENDEL_THREADS, else CPU count."""
    if configured:
        return max(int(configured), 1)
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(int(value), 1)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {value!r}")
    return os.cpu_count() or 1


def ordered_map(function: Callable[[Item], Result], items: Iterable[Item], workers: int = 1) -> Iterator[Result]:
    """Apply `function` on a bounded thread pool; results come back in input order.

    At most 4 * workers items are in flight, so long streams are not materialized.
    """
    if workers <= 1:
        for item in items:
            yield function(item)
        return
    pending: Deque[concurrent.futures.Future] = collections.deque()
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        for item in items:
            pending.append(executor.submit(function, item))
            if len(pending) >= 4 * workers:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()
