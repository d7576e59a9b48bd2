from __future__ import absolute_import, unicode_literals
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import log


def replicate_rng(seed, *key):
    """Generator for one replicate, derived from (seed, key) only."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def map_tasks(func, tasks, workers=1):
    """Ordered map, serial or on a process pool; func must be picklable."""
    tasks = list(tasks)
    if workers is None or workers <= 1 or len(tasks) < 2:
        return [func(t) for t in tasks]
    log.debug('running %s tasks on %s workers'%(len(tasks), workers))
    chunksize = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, tasks, chunksize=chunksize))
