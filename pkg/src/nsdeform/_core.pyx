# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Each function mirrors one in ``_fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def pava_sorted(const double[::1] y, const double[::1] w):
    """Weighted non-decreasing isotonic fit of ``y`` (already in key order)."""
    cdef Py_ssize_t n = y.shape[0]
    cdef double[::1] bval = np.empty(n)
    cdef double[::1] bwt = np.empty(n)
    cdef Py_ssize_t[::1] bsize = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t nb = 0, i, j, k
    cdef double wsum, v
    for i in range(n):
        bval[nb] = y[i]
        bwt[nb] = w[i]
        bsize[nb] = 1
        nb += 1
        while nb > 1 and bval[nb - 2] > bval[nb - 1]:
            wsum = bwt[nb - 2] + bwt[nb - 1]
            if wsum > 0:
                v = (bwt[nb - 2] * bval[nb - 2] + bwt[nb - 1] * bval[nb - 1]) / wsum
            else:
                v = 0.5 * (bval[nb - 2] + bval[nb - 1])
            bval[nb - 2] = v
            bwt[nb - 2] = wsum
            bsize[nb - 2] += bsize[nb - 1]
            nb -= 1
    out = np.empty(n)
    cdef double[::1] o = out
    k = 0
    for j in range(nb):
        for i in range(bsize[j]):
            o[k] = bval[j]
            k += 1
    return out


cdef inline double _epan(const double[:, ::1] a, Py_ssize_t i,
                         const double[:, ::1] b, Py_ssize_t k,
                         Py_ssize_t p, double lam2) noexcept nogil:
    cdef double d2 = 0.0, t
    cdef Py_ssize_t c
    for c in range(p):
        t = a[i, c] - b[k, c]
        d2 += t * t
    if d2 > lam2:
        return 0.0
    return 1.0 - d2 / lam2


def kernel_moments(const double[:, ::1] centers, const double[:, ::1] coords,
                   const double[::1] z, double lam):
    """Kernel mass and first two value moments around each center."""
    cdef Py_ssize_t m = centers.shape[0], n = coords.shape[0], p = coords.shape[1]
    cdef double lam2 = lam * lam, kv
    cdef Py_ssize_t i, k
    a_arr = np.zeros(m)
    s1_arr = np.zeros(m)
    s2_arr = np.zeros(m)
    cdef double[::1] a = a_arr, s1 = s1_arr, s2 = s2_arr
    with nogil:
        for i in range(m):
            for k in range(n):
                kv = _epan(centers, i, coords, k, p, lam2)
                if kv > 0.0:
                    a[i] += kv
                    s1[i] += kv * z[k]
                    s2[i] += kv * z[k] * z[k]
    return a_arr, s1_arr, s2_arr


def leave_two_out(const double[:, ::1] coords, const double[::1] z, double lam):
    """Sum over ordered pairs i != j of the squared leave-two-out error.

    Returns ``(total, n_used, n_skipped)`` counted over ordered pairs.
    """
    cdef Py_ssize_t n = coords.shape[0], p = coords.shape[1]
    cdef double lam2 = lam * lam
    cdef Py_ssize_t i, j
    cdef double kij, ai, bi, ci, aj, bj, cj, est, star, dz
    cdef double total = 0.0
    cdef long used = 0, skipped = 0
    a_arr, s1_arr, s2_arr = kernel_moments(coords, coords, z, lam)
    cdef double[::1] a = a_arr, s1 = s1_arr, s2 = s2_arr
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                kij = _epan(coords, i, coords, j, p, lam2)
                ai = a[i] - 1.0 - kij
                bi = s1[i] - z[i] - kij * z[j]
                ci = s2[i] - z[i] * z[i] - kij * z[j] * z[j]
                aj = a[j] - 1.0 - kij
                bj = s1[j] - z[j] - kij * z[i]
                cj = s2[j] - z[j] * z[j] - kij * z[i] * z[i]
                dz = z[i] - z[j]
                star = 0.5 * dz * dz
                if ai <= 1e-12 or aj <= 1e-12:
                    skipped += 2
                    continue
                est = (ci * aj + ai * cj - 2.0 * bi * bj) / (2.0 * ai * aj)
                if est < 0.0:
                    est = 0.0
                total += 2.0 * (est - star) * (est - star)
                used += 2
    return total, used, skipped
