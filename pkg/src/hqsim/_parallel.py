"""Thread pool sized by ``HQSIM_THREADS`` with order-preserving map.

Workers only ever fill their own output slot, and all reductions happen
afterwards in index order, so results do not depend on the pool size.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def n_workers() -> int:
    raw = os.environ.get("HQSIM_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"HQSIM_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("HQSIM_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def ordered_map(fn, items):
    items = list(items)
    workers = min(n_workers(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
