"""Chunked, order-preserving evaluation over a thread pool.

Chunk boundaries depend only on the input length, never on the worker
count, so every elementwise result is computed by the same code path on the
same slice and the concatenated output is bit-identical for any number of
workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

CHUNK = 8192
ENV_VAR = "UNIHARM_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def worker_count(workers: int | None = None) -> int:
    """Resolve the worker count: explicit argument, then ``UNIHARM_THREADS``, then auto."""
    if workers is None:
        raw = os.environ.get(ENV_VAR, "0").strip() or "0"
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    if workers < 0:
        raise ValueError("worker count must be >= 0")
    if workers == 0:
        workers = os.cpu_count() or 1
    return workers


def map_chunks(fn: Callable[[np.ndarray], np.ndarray], z: np.ndarray,
               workers: int | None = None) -> np.ndarray:
    """Apply ``fn`` to fixed-size slices of the flat array ``z`` and concatenate."""
    z = np.ascontiguousarray(z).ravel()
    if z.size <= CHUNK:
        return np.asarray(fn(z))
    slices = [z[i:i + CHUNK] for i in range(0, z.size, CHUNK)]
    n = worker_count(workers)
    if n == 1:
        parts = [fn(s) for s in slices]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            parts = list(pool.map(fn, slices))
    return np.concatenate([np.asarray(p) for p in parts])


def map_ordered(fn: Callable[[T], R], items: Sequence[T],
                workers: int | None = None) -> list[R]:
    """``[fn(x) for x in items]``, possibly concurrent, results in input order."""
    n = worker_count(workers)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
