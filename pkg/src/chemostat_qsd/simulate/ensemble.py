"""Replica ensembles with per-replica random streams.

Replica ``i`` always draws from ``RngStream(master_seed, i)`` and results are
returned in index order, so the outcome does not depend on ``threads``.
"""

import os
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import numpy as np
import psutil
from loguru import logger
from tqdm import tqdm

from ..common.errors import ConfigurationError
from ..common.rng import RngStream

THREADS_ENV = "CHEMOSTAT_QSD_THREADS"


def resolve_threads(requested: int | None = None) -> int:
    """Worker count: explicit value, then the environment, then the CPU count."""
    if requested is None:
        raw = os.environ.get(THREADS_ENV)
        if raw:
            try:
                requested = int(raw)
            except ValueError:
                raise ConfigurationError(
                    f"{THREADS_ENV} must be an integer, got {raw!r}"
                ) from None
    if requested is None:
        return min(4, psutil.cpu_count() or 1)
    if requested < 1:
        raise ConfigurationError(f"threads must be >= 1, got {requested}")
    return requested


def _run_chunk(
    task: Callable, master_seed: int, start: int, stop: int, base_stream: int
) -> list[Any]:
    return [
        task(index, RngStream(master_seed, base_stream + index).generator())
        for index in range(start, stop)
    ]


def _chunks(n: int, size: int) -> list[tuple[int, int]]:
    return [(start, min(start + size, n)) for start in range(0, n, size)]


def run_replicas(
    task: Callable[[int, Any], Any],
    n: int,
    master_seed: int,
    threads: int = 1,
    chunk_size: int | None = None,
    base_stream: int = 0,
    progress: bool = False,
    desc: str = "replicas",
) -> list[Any]:
    """Run ``task(index, generator)`` for index = 0..n-1.

    Args:
        task: Picklable callable (module-level function or dataclass)
        n: Number of replicas
        master_seed: Seed shared by every replica stream
        threads: Worker processes; 1 runs in-process
        chunk_size: Replicas per submitted job
        base_stream: Offset of the stream ids, to keep batches disjoint
        progress: Show a tqdm bar over chunks

    Returns:
        Results ordered by replica index
    """
    if n < 0:
        raise ConfigurationError(f"n must be nonnegative, got {n}")
    if n == 0:
        return []
    chunk_size = chunk_size or max(1, min(1000, n // (4 * max(threads, 1)) or 1))
    bounds = _chunks(n, chunk_size)
    logger.debug(f"Running {n} {desc} in {len(bounds)} chunks on {threads} workers")

    results: list[Any] = []
    if threads <= 1:
        for start, stop in tqdm(bounds, desc=desc, disable=not progress):
            results.extend(_run_chunk(task, master_seed, start, stop, base_stream))
        return results

    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(_run_chunk, task, master_seed, start, stop, base_stream)
            for start, stop in bounds
        ]
        for future in tqdm(futures, desc=desc, disable=not progress):
            results.extend(future.result())
    return results


def batch_means(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and its standard error."""
    array = np.asarray(values, dtype=float)
    if array.size < 2:
        return float(array.mean()) if array.size else float("nan"), float("inf")
    return float(array.mean()), float(array.std(ddof=1) / np.sqrt(array.size))
