# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementation of the fading synthesis kernel."""

import numpy as np

from libc.math cimport cos


def sos_gains(amps, omegas, phases_i, phases_q, times):
    cdef double[::1] a = np.ascontiguousarray(amps, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(omegas, dtype=np.float64)
    cdef double[:, ::1] pi_ = np.ascontiguousarray(phases_i, dtype=np.float64)
    cdef double[:, ::1] pq = np.ascontiguousarray(phases_q, dtype=np.float64)
    cdef double[::1] t = np.ascontiguousarray(times, dtype=np.float64)

    cdef Py_ssize_t n_l = w.shape[0]
    cdef Py_ssize_t n_m = w.shape[1]
    cdef Py_ssize_t n_t = t.shape[0]

    out = np.empty((n_l, n_t), dtype=np.complex128)
    cdef double complex[:, ::1] o = out

    cdef Py_ssize_t l, m, k
    cdef double re, im, arg, wt
    for l in range(n_l):
        for k in range(n_t):
            re = 0.0
            im = 0.0
            for m in range(n_m):
                wt = w[l, m] * t[k]
                re += cos(wt + pi_[l, m])
                im += cos(wt + pq[l, m])
            o[l, k] = a[l] * (re + 1j * im)
    return out
