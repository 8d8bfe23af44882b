import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    """Worker cap from ``LOCREG_THREADS`` (default 1)."""
    raw = os.environ.get("LOCREG_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """``list(map(fn, items))``, spread over threads; output keeps input order."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
