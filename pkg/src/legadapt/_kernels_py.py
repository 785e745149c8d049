"""Pure numpy fallback for the compiled kernels.

Mirrors the signatures in ``_kernels.pyx``.  The recurrence is vectorized
over the sample axis; per-coefficient reductions go through ``np.dot``,
whose blocked summation keeps rounding error comparable to the compiled
Kahan loops.
"""

import math

import numpy as np

_SQRT_HALF = math.sqrt(0.5)


def leg_row(k_max, x):
    """Row (L_0(x), ..., L_{k_max}(x)) in one recurrence pass."""
    out = np.empty(k_max + 1)
    out[0] = _SQRT_HALF
    if k_max == 0:
        return out
    p_prev, p_cur = 1.0, x
    out[1] = x * math.sqrt(1.5)
    for k in range(1, k_max):
        p_prev, p_cur = p_cur, ((2 * k + 1) * x * p_cur - k * p_prev) / (k + 1)
        out[k + 1] = p_cur * math.sqrt(k + 1.5)
    return out


def _sweep(xs, k_max, reduce_k):
    """Drive the recurrence over xs, calling reduce_k(k, p_k) per degree."""
    n = xs.shape[0]
    reduce_k(0, None)
    if k_max == 0:
        return
    p_prev = np.ones(n)
    p_cur = xs.copy()
    scratch = np.empty(n)
    reduce_k(1, p_cur)
    for k in range(1, k_max):
        np.multiply(xs, p_cur, out=scratch)
        scratch *= (2 * k + 1) / (k + 1)
        p_prev *= k / (k + 1)
        scratch -= p_prev
        p_prev, p_cur, scratch = p_cur, scratch, p_prev
        reduce_k(k + 1, p_cur)


def coeff_sums(xs, w, k_max):
    """s_k = sum_i w_i L_k(x_i) for k = 0..k_max, one sweep over the data."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if xs.shape != w.shape:
        raise ValueError("xs and w must have the same length")
    out = np.empty(k_max + 1)

    def reduce_k(k, p_k):
        if k == 0:
            out[0] = w.sum() * _SQRT_HALF
        else:
            out[k] = np.dot(w, p_k) * math.sqrt(k + 0.5)

    _sweep(xs, k_max, reduce_k)
    return out


def sq_sums(xs, k_max):
    """S_k = sum_i L_k(x_i)^2 for k = 0..k_max."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    out = np.empty(k_max + 1)

    def reduce_k(k, p_k):
        if k == 0:
            out[0] = 0.5 * xs.shape[0]
        else:
            out[k] = np.dot(p_k, p_k) * (k + 0.5)

    _sweep(xs, k_max, reduce_k)
    return out


def eval_series(coeffs, xs):
    """f(x) = sum_j coeffs[j] L_j(x) evaluated at every x in xs."""
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    n = xs.shape[0]
    out = np.zeros(n)
    if coeffs.shape[0] == 0:
        return out
    term = np.empty(n)

    def reduce_k(k, p_k):
        if k >= coeffs.shape[0]:
            return
        if k == 0:
            np.add(out, coeffs[0] * _SQRT_HALF, out=out)
        else:
            np.multiply(p_k, coeffs[k] * math.sqrt(k + 0.5), out=term)
            np.add(out, term, out=out)

    _sweep(xs, coeffs.shape[0] - 1, reduce_k)
    return out
