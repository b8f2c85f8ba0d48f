# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled GA hot kernels; mirrors kernels._py exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def fitness_batch(cnp.int64_t[:, :] population, cnp.float64_t[:] scores, double gamma):
    cdef Py_ssize_t k = population.shape[0]
    cdef Py_ssize_t n = population.shape[1]
    out_arr = np.empty(k, dtype=np.float64)
    cdef cnp.float64_t[:] out = out_arr
    cdef Py_ssize_t i, r
    cdef double acc, disc
    for i in range(k):
        acc = 0.0
        disc = 1.0
        for r in range(n):
            acc += disc * scores[population[i, r]]
            disc *= gamma
        out[i] = acc
    return out_arr


def ox1_batch(cnp.int64_t[:, :] p1, cnp.int64_t[:, :] p2,
              cnp.int64_t[:] lo, cnp.int64_t[:] hi):
    cdef Py_ssize_t k = p1.shape[0]
    cdef Py_ssize_t n = p1.shape[1]
    children_arr = np.empty((k, n), dtype=np.int64)
    cdef cnp.int64_t[:, :] children = children_arr
    taken_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[:] taken = taken_arr
    cdef Py_ssize_t i, j, a, b, pos, src
    cdef cnp.int64_t v
    for i in range(k):
        a = lo[i]
        b = hi[i]
        for j in range(n):
            taken[j] = 0
        for j in range(a, b + 1):
            v = p1[i, j]
            children[i, j] = v
            taken[v] = 1
        pos = (b + 1) % n
        for j in range(n):
            src = (b + 1 + j) % n
            v = p2[i, src]
            if not taken[v]:
                children[i, pos] = v
                pos = (pos + 1) % n
    return children_arr
