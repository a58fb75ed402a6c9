# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled survival kernels; see _pykernels for the reference contract."""
import numpy as np


def sign_survival_curves(const double[::1] cos_table, const double[:, ::1] lambdas):
    cdef Py_ssize_t n_r = lambdas.shape[0]
    cdef Py_ssize_t m = lambdas.shape[1]
    out = np.empty((n_r, m + 1), dtype=np.float64)
    cdef double[:, ::1] p = out
    cdef Py_ssize_t r, j, d, last
    cdef double running, acc
    cdef double c0 = cos_table[0]
    for r in range(n_r):
        p[r, 0] = 1.0
        running = 0.0
        for j in range(1, m + 1):
            last = j - 1
            if last >= 1:
                acc = 0.0
                for d in range(1, last + 1):
                    acc += cos_table[d] * lambdas[r, last - d]
                running += lambdas[r, last] * acc
            p[r, j] = 1.0 - j * c0 - 2.0 * running
    return out
