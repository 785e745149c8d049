# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for normalized-Legendre sweeps over sample arrays.

All routines share the forward three-term recurrence
(k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1} and the normalization
L_k = P_k * sqrt(k + 0.5).  Reductions use Kahan compensation in four
independent lanes: the compensation keeps accumulation error at a few
ulp regardless of sample size, and the lanes break the serial
dependency chain so the loop pipelines.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def leg_row(int k_max, double x):
    """Row (L_0(x), ..., L_{k_max}(x)) in one recurrence pass."""
    out = np.empty(k_max + 1, dtype=np.float64)
    cdef double[::1] o = out
    cdef double p_prev = 1.0, p_cur = x, p_next
    cdef int k
    o[0] = sqrt(0.5)
    if k_max == 0:
        return out
    o[1] = x * sqrt(1.5)
    for k in range(1, k_max):
        p_next = ((2.0 * k + 1.0) * x * p_cur - k * p_prev) / (k + 1.0)
        p_prev = p_cur
        p_cur = p_next
        o[k + 1] = p_cur * sqrt(k + 1.5)
    return out


cdef inline double _lane_total(double* acc, double* comp) nogil:
    # fold four Kahan lanes into one compensated total
    cdef double total = 0.0, c = 0.0, y, t
    cdef int j
    for j in range(4):
        y = acc[j] - c
        t = total + y
        c = (t - total) - y
        total = t
        y = -comp[j] - c
        t = total + y
        c = (t - total) - y
        total = t
    return total


def coeff_sums(double[::1] xs, double[::1] w, int k_max):
    """s_k = sum_i w_i L_k(x_i) for k = 0..k_max, one sweep over the data."""
    if xs.shape[0] != w.shape[0]:
        raise ValueError("xs and w must have the same length")
    cdef Py_ssize_t n = xs.shape[0]
    out = np.empty(k_max + 1, dtype=np.float64)
    p_prev_arr = np.ones(n, dtype=np.float64)
    p_cur_arr = np.asarray(xs).copy()
    cdef double[::1] o = out
    cdef double[::1] p_prev = p_prev_arr
    cdef double[::1] p_cur = p_cur_arr
    cdef double acc[4]
    cdef double comp[4]
    cdef double y, t, v, a, b
    cdef Py_ssize_t i, m, head
    cdef int k, j

    with nogil:
        for j in range(4):
            acc[j] = 0.0
            comp[j] = 0.0
        head = n - (n % 4)
        for i in range(0, head, 4):
            for j in range(4):
                y = w[i + j] - comp[j]
                t = acc[j] + y
                comp[j] = (t - acc[j]) - y
                acc[j] = t
        for i in range(head, n):
            y = w[i] - comp[0]
            t = acc[0] + y
            comp[0] = (t - acc[0]) - y
            acc[0] = t
        o[0] = _lane_total(acc, comp) * sqrt(0.5)

        if k_max >= 1:
            for j in range(4):
                acc[j] = 0.0
                comp[j] = 0.0
            for i in range(0, head, 4):
                for j in range(4):
                    y = w[i + j] * p_cur[i + j] - comp[j]
                    t = acc[j] + y
                    comp[j] = (t - acc[j]) - y
                    acc[j] = t
            for i in range(head, n):
                y = w[i] * p_cur[i] - comp[0]
                t = acc[0] + y
                comp[0] = (t - acc[0]) - y
                acc[0] = t
            o[1] = _lane_total(acc, comp) * sqrt(1.5)

        for k in range(1, k_max):
            a = (2.0 * k + 1.0) / (k + 1.0)
            b = k / (k + 1.0)
            for j in range(4):
                acc[j] = 0.0
                comp[j] = 0.0
            for i in range(0, head, 4):
                for j in range(4):
                    v = a * xs[i + j] * p_cur[i + j] - b * p_prev[i + j]
                    p_prev[i + j] = p_cur[i + j]
                    p_cur[i + j] = v
                    y = w[i + j] * v - comp[j]
                    t = acc[j] + y
                    comp[j] = (t - acc[j]) - y
                    acc[j] = t
            for i in range(head, n):
                v = a * xs[i] * p_cur[i] - b * p_prev[i]
                p_prev[i] = p_cur[i]
                p_cur[i] = v
                y = w[i] * v - comp[0]
                t = acc[0] + y
                comp[0] = (t - acc[0]) - y
                acc[0] = t
            o[k + 1] = _lane_total(acc, comp) * sqrt(k + 1.5)
    return out


def sq_sums(double[::1] xs, int k_max):
    """S_k = sum_i L_k(x_i)^2 for k = 0..k_max."""
    cdef Py_ssize_t n = xs.shape[0]
    out = np.empty(k_max + 1, dtype=np.float64)
    p_prev_arr = np.ones(n, dtype=np.float64)
    p_cur_arr = np.asarray(xs).copy()
    cdef double[::1] o = out
    cdef double[::1] p_prev = p_prev_arr
    cdef double[::1] p_cur = p_cur_arr
    cdef double acc[4]
    cdef double comp[4]
    cdef double y, t, v, a, b
    cdef Py_ssize_t i, head
    cdef int k, j

    with nogil:
        head = n - (n % 4)
        o[0] = 0.5 * n
        if k_max >= 1:
            for j in range(4):
                acc[j] = 0.0
                comp[j] = 0.0
            for i in range(0, head, 4):
                for j in range(4):
                    y = p_cur[i + j] * p_cur[i + j] - comp[j]
                    t = acc[j] + y
                    comp[j] = (t - acc[j]) - y
                    acc[j] = t
            for i in range(head, n):
                y = p_cur[i] * p_cur[i] - comp[0]
                t = acc[0] + y
                comp[0] = (t - acc[0]) - y
                acc[0] = t
            o[1] = _lane_total(acc, comp) * 1.5
        for k in range(1, k_max):
            a = (2.0 * k + 1.0) / (k + 1.0)
            b = k / (k + 1.0)
            for j in range(4):
                acc[j] = 0.0
                comp[j] = 0.0
            for i in range(0, head, 4):
                for j in range(4):
                    v = a * xs[i + j] * p_cur[i + j] - b * p_prev[i + j]
                    p_prev[i + j] = p_cur[i + j]
                    p_cur[i + j] = v
                    y = v * v - comp[j]
                    t = acc[j] + y
                    comp[j] = (t - acc[j]) - y
                    acc[j] = t
            for i in range(head, n):
                v = a * xs[i] * p_cur[i] - b * p_prev[i]
                p_prev[i] = p_cur[i]
                p_cur[i] = v
                y = v * v - comp[0]
                t = acc[0] + y
                comp[0] = (t - acc[0]) - y
                acc[0] = t
            o[k + 1] = _lane_total(acc, comp) * (k + 1.5)
    return out


def eval_series(double[::1] coeffs, double[::1] xs):
    """f(x) = sum_j coeffs[j] L_j(x) evaluated at every x in xs."""
    cdef int k_max = coeffs.shape[0] - 1
    cdef Py_ssize_t n = xs.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    p_prev_arr = np.ones(n, dtype=np.float64)
    p_cur_arr = np.asarray(xs).copy()
    cdef double[::1] out = out_arr
    cdef double[::1] p_prev = p_prev_arr
    cdef double[::1] p_cur = p_cur_arr
    cdef double c0, c1, ck, v, a, b
    cdef Py_ssize_t i
    cdef int k

    if k_max < 0:
        return out_arr
    with nogil:
        c0 = coeffs[0] * sqrt(0.5)
        for i in range(n):
            out[i] = c0
        if k_max >= 1:
            c1 = coeffs[1] * sqrt(1.5)
            for i in range(n):
                out[i] += c1 * p_cur[i]
        for k in range(1, k_max):
            a = (2.0 * k + 1.0) / (k + 1.0)
            b = k / (k + 1.0)
            ck = coeffs[k + 1] * sqrt(k + 1.5)
            for i in range(n):
                v = a * xs[i] * p_cur[i] - b * p_prev[i]
                p_prev[i] = p_cur[i]
                p_cur[i] = v
                out[i] += ck * v
    return out_arr
