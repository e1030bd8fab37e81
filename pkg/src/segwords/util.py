"""Small shared helpers: atomic file writes and the thread cap."""

from __future__ import annotations

import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path


@contextmanager
def atomic_write(path: str | Path, mode: str = "w"):
    """Write to a temp file in the target directory, then rename over `path`.

    Readers never observe a half-written file.
    """
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def thread_count() -> int:
    """Worker cap for per-utterance stages; SEGWORDS_THREADS overrides."""
    env = os.environ.get("SEGWORDS_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"SEGWORDS_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise ValueError("SEGWORDS_THREADS must be >= 1")
        return n
    return min(4, os.cpu_count() or 1)


def parallel_map(fn, items):
    """Order-preserving map over items, parallel across utterances.

    Runs serially when the thread cap is 1 so single-threaded runs stay
    easy to profile and reproduce.
    """
    items = list(items)
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
