# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled LSTM cell kernels.

Same contract as ``pycells``: z is (B, 4H) laid out [i | f | g | o],
the forward cache is (B, 5H) laid out [i | f | g | o | tanh(c)].
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()

BACKEND_NAME = "cython"


cdef inline double _sig(double x) nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


def lstm_cell_forward(double[:, ::1] z, double[:, ::1] c_prev):
    cdef Py_ssize_t batch = c_prev.shape[0]
    cdef Py_ssize_t hidden = c_prev.shape[1]
    if z.shape[0] != batch or z.shape[1] != 4 * hidden:
        raise ValueError("preactivation shape does not match cell state")

    h_arr = np.empty((batch, hidden), dtype=np.float64)
    c_arr = np.empty((batch, hidden), dtype=np.float64)
    cache_arr = np.empty((batch, 5 * hidden), dtype=np.float64)
    cdef double[:, ::1] h = h_arr
    cdef double[:, ::1] c = c_arr
    cdef double[:, ::1] cache = cache_arr
    cdef Py_ssize_t b, j
    cdef double gi, gf, gg, go, cv, tc

    with nogil:
        for b in range(batch):
            for j in range(hidden):
                gi = _sig(z[b, j])
                gf = _sig(z[b, hidden + j])
                gg = tanh(z[b, 2 * hidden + j])
                go = _sig(z[b, 3 * hidden + j])
                cv = gf * c_prev[b, j] + gi * gg
                tc = tanh(cv)
                c[b, j] = cv
                h[b, j] = go * tc
                cache[b, j] = gi
                cache[b, hidden + j] = gf
                cache[b, 2 * hidden + j] = gg
                cache[b, 3 * hidden + j] = go
                cache[b, 4 * hidden + j] = tc
    return h_arr, c_arr, cache_arr


def lstm_cell_backward(double[:, ::1] dh, double[:, ::1] dc,
                       double[:, ::1] cache, double[:, ::1] c_prev):
    cdef Py_ssize_t batch = c_prev.shape[0]
    cdef Py_ssize_t hidden = c_prev.shape[1]
    if dh.shape[0] != batch or dh.shape[1] != hidden:
        raise ValueError("dh shape does not match cell state")
    if cache.shape[1] != 5 * hidden:
        raise ValueError("cache width does not match cell state")

    dz_arr = np.empty((batch, 4 * hidden), dtype=np.float64)
    dcp_arr = np.empty((batch, hidden), dtype=np.float64)
    cdef double[:, ::1] dz = dz_arr
    cdef double[:, ::1] dcp = dcp_arr
    cdef Py_ssize_t b, j
    cdef double gi, gf, gg, go, tc, dct

    with nogil:
        for b in range(batch):
            for j in range(hidden):
                gi = cache[b, j]
                gf = cache[b, hidden + j]
                gg = cache[b, 2 * hidden + j]
                go = cache[b, 3 * hidden + j]
                tc = cache[b, 4 * hidden + j]
                dct = dc[b, j] + dh[b, j] * go * (1.0 - tc * tc)
                dz[b, j] = dct * gg * gi * (1.0 - gi)
                dz[b, hidden + j] = dct * c_prev[b, j] * gf * (1.0 - gf)
                dz[b, 2 * hidden + j] = dct * gi * (1.0 - gg * gg)
                dz[b, 3 * hidden + j] = dh[b, j] * tc * go * (1.0 - go)
                dcp[b, j] = dct * gf
    return dz_arr, dcp_arr
