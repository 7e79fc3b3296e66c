# Compiled distance-scan kernels: the hot inner loop of every vector
# cache lookup. Must stay operation-for-operation identical to
# _pykernels (same accumulation order, one sqrt at the end) so both
# implementations yield bit-identical distances.

from libc.math cimport sqrt

IMPLEMENTATION = "cython"


def l2_distances(double[::1] query, double[::1] block, Py_ssize_t n, double[::1] out):
    cdef Py_ssize_t dim = query.shape[0]
    cdef Py_ssize_t i, j, base
    cdef double acc, d
    for i in range(n):
        base = i * dim
        acc = 0.0
        for j in range(dim):
            d = query[j] - block[base + j]
            acc += d * d
        out[i] = sqrt(acc)


def cosine_distances(double[::1] query, double[::1] block, Py_ssize_t n, double[::1] out):
    cdef Py_ssize_t dim = query.shape[0]
    cdef Py_ssize_t i, j, base
    cdef double qn = 0.0, dot, cn, v, d
    for j in range(dim):
        qn += query[j] * query[j]
    if qn == 0.0:
        raise ValueError("zero-norm vector")
    qn = sqrt(qn)
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
        d = 1.0 - dot / (qn * sqrt(cn))
        # rounding can push 1 - cos a hair below zero for aligned vectors
        out[i] = d if d > 0.0 else 0.0
