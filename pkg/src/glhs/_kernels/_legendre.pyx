"""Compiled hot kernels: Legendre tables and fused expansion evaluation.

Bit-identical to _fallback.py by construction: same recurrence grouping,
same normalization step, same accumulation order, and the extension is
compiled with -ffp-contract=off so no FMA contraction changes rounding.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def legendre_table(x, int nmax):
    """Orthonormal Legendre values phi_0..phi_nmax at x, shape (len(x), nmax+1)."""
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t m = xv.shape[0]
    out_arr = np.empty((m, nmax + 1))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i
    cdef int k
    cdef double xi
    for i in range(m):
        xi = xv[i]
        out[i, 0] = 1.0
        if nmax >= 1:
            out[i, 1] = xi
        for k in range(1, nmax):
            out[i, k + 1] = ((2 * k + 1) * xi * out[i, k] - k * out[i, k - 1]) / (k + 1)
        for k in range(nmax + 1):
            out[i, k] = out[i, k] * sqrt(2.0 * k + 1.0)
    return out_arr


def pce_eval(points, indices, coef):
    """Evaluate sum_j coef[j] * prod_k phi_{indices[j,k]}(points[:,k]).

    points: (m, d) float64, indices: (N, d) int64, coef: (N,) float64.
    """
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.int64_t[:, ::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef double[::1] cf = np.ascontiguousarray(coef, dtype=np.float64)
    cdef Py_ssize_t m = pts.shape[0]
    cdef int d = pts.shape[1]
    cdef Py_ssize_t n_terms = idx.shape[0]
    cdef int nmax = 0
    cdef Py_ssize_t j
    cdef int k, t, deg
    for j in range(n_terms):
        for k in range(d):
            if idx[j, k] > nmax:
                nmax = <int> idx[j, k]
    scratch_arr = np.empty((d, nmax + 1))
    cdef double[:, ::1] scratch = scratch_arr
    out_arr = np.empty(m)
    cdef double[::1] out = out_arr
    cdef double xi, acc, term
    cdef Py_ssize_t i
    for i in range(m):
        for k in range(d):
            xi = pts[i, k]
            scratch[k, 0] = 1.0
            if nmax >= 1:
                scratch[k, 1] = xi
            for t in range(1, nmax):
                scratch[k, t + 1] = ((2 * t + 1) * xi * scratch[k, t] - t * scratch[k, t - 1]) / (t + 1)
            for t in range(nmax + 1):
                scratch[k, t] = scratch[k, t] * sqrt(2.0 * t + 1.0)
        acc = 0.0
        for j in range(n_terms):
            term = cf[j]
            for k in range(d):
                deg = <int> idx[j, k]
                if deg > 0:
                    term = term * scratch[k, deg]
            acc = acc + term
        out[i] = acc
    return out_arr
