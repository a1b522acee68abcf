"""Small shared helpers: seeded RNG substreams and ordered parallel map."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

_MASK64 = (1 << 64) - 1


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key); identical regardless of the
    order work items are executed in."""
    return np.random.default_rng([seed & _MASK64, *[k & _MASK64 for k in key]])


def child_seed(seed: int, *key: int) -> int:
    """Derive a plain integer seed for a nested component."""
    return int(substream(seed, *key).integers(0, 1 << 62))


def parallel_map(
    fn: Callable[[T], R], items: Sequence[T], threads: int = 1
) -> list[R]:
    """Map preserving input order; with threads > 1 uses a thread pool.

    Work items must not depend on execution order, so results are identical
    for any thread count.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
