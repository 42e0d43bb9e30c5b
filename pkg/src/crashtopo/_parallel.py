from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable


def ordered_map(fn: Callable, items: list, workers: int | None = None) -> list:
    """Map ``fn`` over ``items``; results always come back in input order."""
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
    return [fn(item) for item in items]
