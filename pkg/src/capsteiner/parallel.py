"""Deterministic fan-out of independent candidates over a process pool.

The worker count comes from ``CAPSTEINER_THREADS`` (default 1).  Results are
merged by ``(objective, candidate index)`` so the answer never depends on how
many workers ran.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("CAPSTEINER_THREADS", "1")))
    except ValueError:
        return 1


def best_of(fn: Callable, items: Sequence, workers: int | None = None):
    """Return ``(index, result)`` of the item minimising ``fn(item)[0]``, ties to the lowest index.

    ``fn`` returns ``None`` (no result) or ``(objective, payload)``; it must be
    picklable when more than one worker is used.
    """
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) < 2:
        results = map(fn, items)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
    best = None
    for i, res in enumerate(results):
        if res is not None and (best is None or res[0] < best[1][0]):
            best = (i, res)
    return best
