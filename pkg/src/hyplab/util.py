"""Small shared helpers."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def parallel_map(fn, items, threads: int = 1):
    """Ordered map, optionally on a thread pool.

    Results are collected in input order, so the output is identical for any
    thread count (each item is computed independently).
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
