"""
parallel module
Order-preserving parallel map used by the profile and checker sweeps.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> list[R]:
    """
    Apply ``fn`` to every item and return the results in input order.

    ``jobs <= 1`` runs inline; otherwise a thread pool of ``jobs`` workers is
    used.

    :param fn: Pure function to apply.
    :type fn: Callable
    :param items: Inputs.
    :type items: Iterable
    :param jobs: Degree of parallelism.
    :type jobs: int
    :returns: ``[fn(x) for x in items]``.
    :rtype: list
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
