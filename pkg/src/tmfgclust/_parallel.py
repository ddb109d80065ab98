"""Worker-count plumbing shared by the parallel stages.

All parallel loops in this package are data-parallel over disjoint output
slices, so results are bit-identical for any worker count. Workers are
plain threads: the heavy per-chunk work (numpy sorts, numba kernels)
releases the GIL.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

WORKERS_ENV = "TMFGCLUST_WORKERS"


def resolve_workers(workers: int | None = None) -> int:
    """Pick the worker count: explicit arg, else env override, else cpu count."""
    if workers is not None:
        if workers < 1:
            raise ValueError(f"worker count must be >= 1, got {workers}")
        return int(workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def set_numba_threads(workers: int) -> int:
    """Cap numba's thread pool at the requested worker count.

    numba refuses counts above its launch-time maximum, so the request is
    clamped to what the host allows.
    """
    import numba

    n = max(1, min(workers, numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def chunk_ranges(n: int, workers: int) -> list[tuple[int, int]]:
    """Split range(n) into at most `workers` contiguous spans."""
    if n <= 0:
        return []
    parts = min(workers, n)
    step = (n + parts - 1) // parts
    return [(lo, min(lo + step, n)) for lo in range(0, n, step)]


def run_chunked(fn, n: int, workers: int) -> None:
    """Run fn(lo, hi) over a chunking of range(n), possibly on threads.

    fn must write only to rows [lo, hi) of its output, which keeps the
    result independent of the chunking.
    """
    spans = chunk_ranges(n, workers)
    if workers <= 1 or len(spans) <= 1:
        for lo, hi in spans:
            fn(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in spans]
        for f in futures:
            f.result()


def run_tasks(fn, items, workers: int) -> list:
    """Map fn over items, preserving order; threads when workers > 1."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
