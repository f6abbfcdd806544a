"""Deterministic parallel scans.

Profile grids are split into contiguous chunks that are scanned on a
thread pool. Each chunk reports its first hit in enumeration order and the
merge keeps the hit of the earliest chunk, so the result never depends on
the schedule or on the worker count.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

CHUNKS_PER_WORKER = 4


def available_workers() -> int:
    return os.cpu_count() or 1


def split_chunks(items: Sequence[T], workers: int) -> List[Sequence[T]]:
    """Split ``items`` into contiguous chunks, preserving order."""
    if workers <= 1 or len(items) <= 1:
        return [items]
    count = min(len(items), workers * CHUNKS_PER_WORKER)
    size, extra = divmod(len(items), count)
    chunks = []
    start = 0
    for k in range(count):
        end = start + size + (1 if k < extra else 0)
        chunks.append(items[start:end])
        start = end
    return chunks


def first_hit(
    items: Sequence[T],
    scan: Callable[[Sequence[T]], Optional[R]],
    workers: int = 1,
) -> Optional[R]:
    """
    Run ``scan`` over contiguous chunks of ``items``.

    Args:
        items: Ordered work items (usually bid profiles).
        scan: Scans one chunk in order and returns its first hit or None.
        workers: Thread count; 1 scans sequentially.

    Returns:
        The hit of the earliest chunk that has one, or None.
    """
    chunks = split_chunks(items, workers)
    if len(chunks) == 1:
        return scan(chunks[0])

    results: Dict[int, Optional[R]] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(scan, chunk): k for k, chunk in enumerate(chunks)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()

    for k in range(len(chunks)):
        if results[k] is not None:
            return results[k]
    return None


def map_ordered(
    items: Sequence[T],
    work: Callable[[T], R],
    workers: int = 1,
) -> List[R]:
    """Apply ``work`` to every item and return results in input order."""
    if workers <= 1:
        return [work(item) for item in items]

    results: Dict[int, R] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(work, item): k for k, item in enumerate(items)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return [results[k] for k in range(len(items))]
