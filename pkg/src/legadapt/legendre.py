"""Legendre polynomials, the orthonormal basis, pair-sum kernels, and
Gauss-Legendre quadrature.

The basis used throughout the package is L_k(x) = P_k(x) * sqrt(k + 0.5),
orthonormal on [-1, 1].  All functions here are pure; values can be shared
freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import leg_row as _leg_row

__all__ = [
    "QuadratureRule",
    "QuadratureConvergenceError",
    "legendre_p",
    "legendre_pair",
    "legendre_l_row",
    "legendre_l_table",
    "legendre_p_deriv",
    "christoffel_darboux",
    "gauss_legendre_rule",
]

class QuadratureConvergenceError(RuntimeError):
    """Newton iteration for quadrature nodes failed to converge."""


def _check_x(x: float) -> float:
    x = float(x)
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"abscissa {x!r} outside [-1, 1]")
    return x


def legendre_p(k: int, x: float) -> float:
    """P_k(x) by the forward three-term recurrence."""
    if k < 0:
        raise ValueError("k must be >= 0")
    x = _check_x(x)
    if k == 0:
        return 1.0
    p_prev, p_cur = 1.0, x
    for m in range(1, k):
        p_prev, p_cur = p_cur, ((2 * m + 1) * x * p_cur - m * p_prev) / (m + 1)
    return p_cur


def legendre_pair(k: int, x: float) -> tuple[float, float]:
    """(P_k(x), P_{k+1}(x)) in one recurrence pass."""
    if k < 0:
        raise ValueError("k must be >= 0")
    x = _check_x(x)
    p_prev, p_cur = 1.0, x
    for m in range(1, k + 1):
        p_prev, p_cur = p_cur, ((2 * m + 1) * x * p_cur - m * p_prev) / (m + 1)
    return (p_prev, p_cur) if k >= 1 else (1.0, x)


def legendre_l_row(k_max: int, x: float) -> np.ndarray:
    """Row (L_0(x), ..., L_{k_max}(x)) with L_k = P_k * sqrt(k + 0.5)."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    return _leg_row(k_max, _check_x(x))


def legendre_l_table(k_max: int, xs: np.ndarray) -> np.ndarray:
    """Table of shape (k_max + 1, len(xs)) with rows L_k(xs).

    Vectorized over the abscissas; intended for tests and quadrature
    checks where the whole table is needed at once.
    """
    xs = np.asarray(xs, dtype=np.float64)
    table = np.empty((k_max + 1, xs.shape[0]))
    table[0] = math.sqrt(0.5)
    if k_max == 0:
        return table
    p_prev = np.ones_like(xs)
    p_cur = xs.copy()
    table[1] = p_cur * math.sqrt(1.5)
    for k in range(1, k_max):
        p_prev, p_cur = p_cur, ((2 * k + 1) * xs * p_cur - k * p_prev) / (k + 1)
        table[k + 1] = p_cur * math.sqrt(k + 1.5)
    return table


def _deriv_endpoint_series(k: int, t: float) -> float:
    """P_k'(1 - t) for small t >= 0 via the hypergeometric expansion
    P_k(1 - 2u) = sum_j (-k)_j (k+1)_j / (j!)^2 u^j, differentiated
    term by term.  Avoids the eps / t cancellation of the recurrence
    identity next to the endpoint.
    """
    u = 0.5 * t
    # coefficient of u^(j-1) in the derivative: -(1/2) j a_j
    term = k * (k + 1) / 2.0  # j = 1
    total = term
    a_j = -float(k) * (k + 1)  # a_1
    j = 1
    while True:
        a_j *= (j - k) * (k + 1 + j) / ((j + 1) * (j + 1))
        j += 1
        term = -0.5 * j * a_j * u ** (j - 1)
        total += term
        if abs(term) <= 1e-17 * abs(total) or j > k:
            return total


def legendre_p_deriv(k: int, x: float) -> float:
    """P_k'(x).

    Interior points use (1 - x^2) P_k' = k (P_{k-1} - x P_k); next to the
    endpoints that identity cancels catastrophically, so a truncated
    hypergeometric expansion around +-1 takes over (exact limit
    P_k'(+-1) = (+-1)^(k-1) k (k+1) / 2 at the endpoints themselves).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    x = _check_x(x)
    if k == 0:
        return 0.0
    t = 1.0 - abs(x)
    if t <= 1e-4 / (1.0 + (k / 100.0) ** 2):
        d = _deriv_endpoint_series(k, t)
        return d if x > 0 else (-1.0) ** (k - 1) * d
    p_km1, p_k = legendre_pair(k - 1, x)
    return k * (p_km1 - x * p_k) / (1.0 - x * x)


def _cd_midpoint(k: int, m: float, delta: float) -> float:
    """Derivative form of the kernel at the midpoint m = (x + y) / 2 with
    the second-order curvature correction in delta = x - y.

    One forward sweep produces P_j, P_j', P_j'' (the differentiated
    three-term recurrences are stable everywhere, endpoints included);
    the correction (delta^2 / 4) sum_j (j + 1/2)(P_j P_j'' - P_j'^2)
    extends the expansion's validity to separations around 1e-4 / (k+1).
    """
    p_prev, p_cur = 1.0, m
    d_prev, d_cur = 0.0, 1.0
    s_prev, s_cur = 0.0, 0.0
    corr = 0.5 * (p_prev * s_prev - d_prev * d_prev)  # j = 0 term is 0
    if k >= 1:
        corr += 1.5 * (p_cur * s_cur - d_cur * d_cur)
    for j in range(1, k + 1):
        p_next = ((2 * j + 1) * m * p_cur - j * p_prev) / (j + 1)
        d_next = ((2 * j + 1) * (p_cur + m * d_cur) - j * d_prev) / (j + 1)
        s_next = ((2 * j + 1) * (2 * d_cur + m * s_cur) - j * s_prev) / (j + 1)
        p_prev, p_cur = p_cur, p_next
        d_prev, d_cur = d_cur, d_next
        s_prev, s_cur = s_cur, s_next
        if j < k:
            corr += (j + 1.5) * (p_cur * s_cur - d_cur * d_cur)
    # after the loop: p_prev = P_k, p_cur = P_{k+1}, same for derivatives
    diag = 0.5 * (k + 1) * (p_prev * d_cur - p_cur * d_prev)
    return diag + 0.25 * delta * delta * corr


def christoffel_darboux(k: int, x: float, y: float) -> float:
    """G_k(x, y) = sum_{m=0}^{k} L_m(x) L_m(y).

    Uses the closed two-term ratio form away from the diagonal and the
    curvature-corrected derivative form at the midpoint when |x - y|
    falls below the switch scale 1e-4 / (k + 1); the crossover keeps the
    relative error near 1e-10 on both sides.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    x = _check_x(x)
    y = _check_x(y)
    if abs(x - y) * (k + 1) > 1e-4:
        pk_x, pk1_x = legendre_pair(k, x)
        pk_y, pk1_y = legendre_pair(k, y)
        return 0.5 * (k + 1) * (pk1_x * pk_y - pk_x * pk1_y) / (x - y)
    return _cd_midpoint(k, 0.5 * (x + y), x - y)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not np.all(np.diff(self.nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")

    def integrate(self, values: np.ndarray) -> float:
        """Integral of a function given its values at the nodes."""
        return float(np.dot(self.weights, values))


def gauss_legendre_rule(order: int, tol: float = 1e-15, max_iter: int = 100) -> QuadratureRule:
    """Gauss-Legendre rule of the given order (exact to degree 2*order - 1).

    Nodes are Newton-iterated zeros of P_order starting from Chebyshev
    points; weights are 2 / ((1 - x^2) P_order'(x)^2).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    m = order

    def p_and_deriv(x):
        p_prev = np.ones_like(x)
        p_cur = x.copy()
        for k in range(1, m):
            p_prev, p_cur = p_cur, ((2 * k + 1) * x * p_cur - k * p_prev) / (k + 1)
        if m == 1:
            return p_cur, np.ones_like(x)
        return p_cur, m * (p_prev - x * p_cur) / (1.0 - x * x)

    i = np.arange(1, m + 1)
    x = np.cos(np.pi * (i - 0.25) / (m + 0.5))
    for _ in range(max_iter):
        p, dp = p_and_deriv(x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < tol:
            break
    else:
        raise QuadratureConvergenceError(
            f"node iteration did not converge for order {order} "
            f"after {max_iter} steps"
        )
    _, dp = p_and_deriv(x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    idx = np.argsort(x)
    return QuadratureRule(nodes=x[idx], weights=w[idx], order=order)
