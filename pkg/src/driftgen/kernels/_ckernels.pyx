# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan and sampling kernels.

Must stay semantically identical to _pykernels: IEEE comparison semantics
(NaN fails every range test) and plain multiply-add-clip for the mixture
draw. No randomness lives here. Loops are predicate-major linear passes so
the compiler can vectorize them.
"""

import numpy as np


cdef void _fill_mask(Py_ssize_t n,
                     double[:, ::1] range_cols, double[::1] lows, double[::1] highs,
                     long long[:, ::1] eq_cols, long long[::1] eq_codes,
                     unsigned char[::1] mask) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double v, lo, hi
    cdef long long code
    for j in range(range_cols.shape[0]):
        lo = lows[j]
        hi = highs[j]
        for i in range(n):
            v = range_cols[j, i]
            mask[i] &= (v >= lo) & (v <= hi)
    for j in range(eq_cols.shape[0]):
        code = eq_codes[j]
        for i in range(n):
            mask[i] &= eq_cols[j, i] == code


def predicate_mask(Py_ssize_t n,
                   double[:, ::1] range_cols, double[::1] lows, double[::1] highs,
                   long long[:, ::1] eq_cols, long long[::1] eq_codes):
    out = np.ones(n, dtype=np.uint8)
    cdef unsigned char[::1] mask = out
    if n:
        _fill_mask(n, range_cols, lows, highs, eq_cols, eq_codes, mask)
    return out.view(np.bool_)


def predicate_count(Py_ssize_t n,
                    double[:, ::1] range_cols, double[::1] lows, double[::1] highs,
                    long long[:, ::1] eq_cols, long long[::1] eq_codes):
    out = np.ones(n, dtype=np.uint8)
    cdef unsigned char[::1] mask = out
    cdef long long count = 0
    cdef Py_ssize_t i
    if n:
        with nogil:
            _fill_mask(n, range_cols, lows, highs, eq_cols, eq_codes, mask)
            for i in range(n):
                count += mask[i]
    return int(count)


def mixture_sample(double[::1] points, long long[::1] idx, double[::1] noise,
                   double bandwidth, double lo, double hi):
    cdef Py_ssize_t n = idx.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double v
    with nogil:
        for i in range(n):
            v = points[idx[i]] + bandwidth * noise[i]
            if v < lo:
                v = lo
            elif v > hi:
                v = hi
            o[i] = v
    return out
