"""Wall-clock timing of pipeline stages (grid searches, Monte Carlo loops)."""

import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager

logger = logging.getLogger(__name__)


def format_duration(seconds: float) -> str:
    """``250ms``, ``5.50s`` or ``2m 5s``."""
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    if seconds < 60:
        return f"{seconds:.2f}s"
    minutes, rest = divmod(seconds, 60)
    return f"{int(minutes)}m {rest:.0f}s"


@contextmanager
def timer(label: str = "", logger: logging.Logger = logger) -> Iterator[dict[str, float]]:
    """
    Log the duration of the enclosed block at DEBUG.

    The yielded dict gets its ``elapsed`` entry (seconds) when the block
    exits, also when it raises::

        with timer("grid search over 44 candidates") as t:
            ...
        t["elapsed"]
    """
    stats = {"elapsed": 0.0}
    start = time.perf_counter()
    try:
        yield stats
    finally:
        stats["elapsed"] = time.perf_counter() - start
        what = f"[{label}] completed" if label else "Completed"
        logger.debug(f"{what} in {format_duration(stats['elapsed'])}")
