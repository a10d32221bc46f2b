"""Deterministic parallel map used for term- and sample-level parallelism.

Work items are mapped with a thread pool (numpy kernels release the GIL)
and results are reduced in input order, so the output is independent of
the worker count.
"""

from concurrent.futures import ThreadPoolExecutor


def parallel_map(fn, items, threads=1):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))
