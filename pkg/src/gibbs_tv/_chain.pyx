# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled random-scan heat-bath chain kernels.

Both kernels consume one pre-drawn site index and one pre-drawn uniform per
step, so the compiled and pure-Python kernels walk bit-identical
trajectories from the same random arrays.
"""

from libc.math cimport exp

import numpy as np

KERNEL_NAME = "compiled"


def run_hardcore(const int[:] indptr, const int[:] indices, const double[:] p_plus,
                 signed char[:] state, const long long[:] sites, const double[:] us):
    """Advance a hardcore heat-bath chain; mutates ``state`` in place."""
    cdef Py_ssize_t t, k, steps = sites.shape[0]
    cdef int v
    cdef bint occupied
    with nogil:
        for t in range(steps):
            v = <int> sites[t]
            occupied = False
            for k in range(indptr[v], indptr[v + 1]):
                if state[indices[k]] == 1:
                    occupied = True
                    break
            if (not occupied) and us[t] < p_plus[v]:
                state[v] = 1
            else:
                state[v] = -1


def run_ising(const int[:] indptr, const int[:] indices, const double[:] csr_j,
              const double[:] h, signed char[:] state, const long long[:] sites,
              const double[:] us):
    """Advance a soft-Ising heat-bath chain; mutates ``state`` in place."""
    cdef Py_ssize_t t, k, steps = sites.shape[0]
    cdef int v
    cdef double c, a, p
    with nogil:
        for t in range(steps):
            v = <int> sites[t]
            c = h[v]
            for k in range(indptr[v], indptr[v + 1]):
                c += csr_j[k] * state[indices[k]]
            a = -2.0 * c
            if a > 709.0:
                p = 0.0
            elif a < -709.0:
                p = 1.0
            else:
                p = 1.0 / (1.0 + exp(a))
            if us[t] < p:
                state[v] = 1
            else:
                state[v] = -1
