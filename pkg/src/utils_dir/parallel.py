"""Deterministic parallel map"""
import logging
from joblib import Parallel, delayed

LOGGER = logging.getLogger(__name__)


def parallel_map(func, items, workers=1):
    """Apply func to every item, results in input order

    workers follows the joblib convention, -1 uses all cores. A single
    worker runs in process, which keeps tracebacks and logging simple.
    """
    items = list(items)
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]
    LOGGER.debug("Mapping {} items on {} workers".format(len(items), workers))
    return Parallel(n_jobs=workers)(delayed(func)(item) for item in items)
