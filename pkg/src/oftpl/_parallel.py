"""Row-chunked parallel evaluation with order-preserving assembly."""

from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

MIN_CHUNK = 32


@functools.lru_cache(maxsize=None)
def _pool(workers: int) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="oftpl")


def map_rows(fn: Callable[[np.ndarray], np.ndarray], rows: np.ndarray, workers: int = 1) -> np.ndarray:
    """Apply a row-wise ``fn`` to ``rows``, split across ``workers`` threads.

    ``fn`` must act independently on each row; chunk results are concatenated
    in index order, so the output does not depend on ``workers``.
    """
    n = len(rows)
    if workers <= 1 or n < 2 * MIN_CHUNK:
        return fn(rows)
    k = min(workers, n // MIN_CHUNK)
    bounds = np.linspace(0, n, k + 1).astype(int)
    parts = _pool(workers).map(lambda ab: fn(rows[ab[0]:ab[1]]), zip(bounds[:-1], bounds[1:]))
    return np.concatenate(list(parts), axis=0)
