# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled window kernels: the hot loop of phrase-compatibility scoring."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def window_scores(double[:, ::1] G, double[::1] w, double[::1] b):
    cdef Py_ssize_t K = G.shape[0]
    cdef Py_ssize_t L = G.shape[1]
    cdef Py_ssize_t taps = w.shape[0]
    cdef Py_ssize_t r = (taps - 1) // 2
    cdef Py_ssize_t k, l, j, off, lo, hi
    A_arr = np.zeros((K, L))
    cdef double[:, ::1] A = A_arr
    cdef double wj
    for j in range(taps):
        off = j - r
        lo = -off if off < 0 else 0
        hi = L - off if off > 0 else L
        wj = w[j]
        for k in range(K):
            for l in range(lo, hi):
                A[k, l] += wj * G[k, l + off]
    for k in range(K):
        for l in range(L):
            A[k, l] += b[k]
    return A_arr


def window_scores_backward(double[:, ::1] G, double[::1] w, double[:, ::1] dA):
    cdef Py_ssize_t K = G.shape[0]
    cdef Py_ssize_t L = G.shape[1]
    cdef Py_ssize_t taps = w.shape[0]
    cdef Py_ssize_t r = (taps - 1) // 2
    cdef Py_ssize_t k, l, j, off, lo, hi
    dG_arr = np.zeros((K, L))
    dw_arr = np.zeros(taps)
    db_arr = np.zeros(K)
    cdef double[:, ::1] dG = dG_arr
    cdef double[::1] dw = dw_arr
    cdef double[::1] db = db_arr
    cdef double wj, acc
    for j in range(taps):
        off = j - r
        lo = -off if off < 0 else 0
        hi = L - off if off > 0 else L
        wj = w[j]
        acc = 0.0
        for k in range(K):
            for l in range(lo, hi):
                dG[k, l + off] += wj * dA[k, l]
                acc += dA[k, l] * G[k, l + off]
        dw[j] = acc
    for k in range(K):
        for l in range(L):
            db[k] += dA[k, l]
    return dG_arr, dw_arr, db_arr
