# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled jet product kernel: sparse Cauchy-product accumulation."""

import numpy as np

cimport numpy as cnp


def convolve(const double[::1] a, const double[::1] b,
             const cnp.int32_t[::1] ti, const cnp.int32_t[::1] tj,
             const cnp.int32_t[::1] to, Py_ssize_t size):
    out_arr = np.zeros(size)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t t
    cdef Py_ssize_t m = ti.shape[0]
    for t in range(m):
        out[to[t]] += a[ti[t]] * b[tj[t]]
    return out_arr
