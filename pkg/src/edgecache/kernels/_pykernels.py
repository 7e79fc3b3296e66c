"""Pure-Python distance-scan kernels.

Fallback twin of the compiled ``_distkernels`` extension. Both versions
perform the exact same IEEE-754 double operations in the exact same
order (left-to-right accumulation, one sqrt at the end), so a cache
built on either produces bit-identical hit/miss decisions.
"""

import math

IMPLEMENTATION = "python"


def l2_distances(query, block, n, out):
    """Euclidean distances from ``query`` to ``n`` packed candidates.

    ``block`` holds the candidate vectors concatenated, each of
    ``len(query)`` components; ``out[i]`` receives the distance to
    candidate ``i``.
    """
    dim = len(query)
    for i in range(n):
        base = i * dim
        acc = 0.0
        for j in range(dim):
            d = query[j] - block[base + j]
            acc += d * d
        out[i] = math.sqrt(acc)


def cosine_distances(query, block, n, out):
    """Cosine distances (1 - cosine similarity) to ``n`` packed candidates.

    Raises ValueError if the query or any candidate has zero norm.
    """
    dim = len(query)
    qn = 0.0
    for j in range(dim):
        qn += query[j] * query[j]
    if qn == 0.0:
        raise ValueError("zero-norm vector")
    qn = math.sqrt(qn)
    for i in range(n):
        base = i * dim
        dot = 0.0
        cn = 0.0
        for j in range(dim):
            v = block[base + j]
            dot += query[j] * v
            cn += v * v
        if cn == 0.0:
            raise ValueError("zero-norm vector")
        d = 1.0 - dot / (qn * math.sqrt(cn))
        # rounding can push 1 - cos a hair below zero for aligned vectors
        out[i] = d if d > 0.0 else 0.0
