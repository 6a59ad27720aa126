"""Seed derivation and order-preserving parallel map.

Every sample or replicate ``i`` of a run seeded with ``master_seed`` draws from its
own stream, so results never depend on the number of workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def derive_seed(master_seed: int, index: int) -> int:
    """Unsigned 64-bit seed for item ``index`` of a run."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def derive_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, index))


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def chunked(items: Sequence[T], size: int) -> list[Sequence[T]]:
    return [items[i : i + size] for i in range(0, len(items), size)]


def pmap(fn: Callable[[T], R], items: Iterable[T], workers: int = 1, chunksize: int = 1) -> list[R]:
    """``[fn(x) for x in items]``, optionally spread over worker processes."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
