"""Order-fixed fan-out over replicas.

Replicas are processed in fixed-size chunks whatever the worker count, so the
floating-point work per replica (and therefore every payload) does not depend on
scheduling.
"""

import numpy as np
from joblib import Parallel, delayed

CHUNK = 64


def chunks(n, size=CHUNK):
    return [(s, min(s + size, n)) for s in range(0, n, size)]


def map_chunks(fn, n, n_jobs=None, size=CHUNK):
    """Concatenate ``fn(start, stop)`` over consecutive chunks of ``range(n)``."""
    parts = chunks(n, size)
    if n_jobs in (None, 1) or len(parts) == 1:
        results = [fn(a, b) for a, b in parts]
    else:
        results = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(fn)(a, b) for a, b in parts)
    return np.concatenate(results, axis=0)
