"""
Order-preserving fan-out of pure per-sample work.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from core.config import settings

T = TypeVar("T")
R = TypeVar("R")


def fan_out(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> List[R]:
    """Apply fn to every item; results come back in input order regardless of workers."""
    items = list(items)
    workers = settings.workers if workers is None else workers
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]

    batch_size = max(1, len(items) // workers)
    batches = [items[i:i + batch_size] for i in range(0, len(items), batch_size)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = executor.map(lambda batch: [fn(item) for item in batch], batches)

    merged: List[R] = []
    for batch_results in results:
        merged.extend(batch_results)
    return merged
