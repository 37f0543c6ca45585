import os
from concurrent.futures import ProcessPoolExecutor


def worker_count(requested: int | None = None) -> int:
    """Workers to use, capped by the DUALITY_LAB_THREADS environment variable."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("DUALITY_LAB_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def parallel_map(fn, items, workers: int | None = None) -> list:
    """Map in input order; results do not depend on the worker count."""
    items = list(items)
    workers = min(worker_count(workers), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
