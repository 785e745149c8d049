import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from legadapt.legendre import (
    QuadratureRule,
    christoffel_darboux,
    gauss_legendre_rule,
    legendre_l_row,
    legendre_l_table,
    legendre_p,
    legendre_p_deriv,
    legendre_pair,
)

# P_50(0.9) computed with mpmath at 60 significant digits
P50_AT_09 = -0.1700376599438367846776116


def test_p0_is_one():
    assert legendre_p(0, 0.37) == 1.0


def test_p2_closed_form():
    assert legendre_p(2, 0.5) == pytest.approx(-0.125, abs=1e-15)


def test_small_degrees_match_hardcoded_polynomials():
    xs = np.linspace(-1, 1, 41)
    for x in xs:
        assert legendre_p(1, x) == pytest.approx(x, abs=1e-15)
        assert legendre_p(3, x) == pytest.approx(0.5 * (5 * x**3 - 3 * x), abs=1e-14)
        assert legendre_p(4, x) == pytest.approx(
            (35 * x**4 - 30 * x**2 + 3) / 8.0, abs=1e-14
        )


def test_p50_against_extended_precision():
    assert legendre_p(50, 0.9) == pytest.approx(P50_AT_09, abs=1e-10)


def test_legendre_p_rejects_out_of_domain():
    with pytest.raises(ValueError):
        legendre_p(3, 1.5)
    with pytest.raises(ValueError):
        legendre_p(-1, 0.0)


def test_l_row_k0():
    row = legendre_l_row(0, 0.9)
    assert row.shape == (1,)
    assert row[0] == pytest.approx(1 / math.sqrt(2), abs=2e-16)


def test_l_row_k1():
    row = legendre_l_row(1, 0.5)
    assert row[0] == pytest.approx(0.7071067811865476, abs=1e-16)
    assert row[1] == pytest.approx(0.6123724356957945, abs=1e-15)


def test_l_row_matches_per_degree_evaluation():
    x = -0.73
    row = legendre_l_row(128, x)
    for k in range(129):
        direct = legendre_p(k, x) * math.sqrt(k + 0.5)
        assert abs(row[k] - direct) <= 1e-13


def test_deriv_p1_constant():
    assert legendre_p_deriv(1, 0.3) == 1.0


def test_deriv_endpoint_limit():
    assert legendre_p_deriv(3, 1.0) == 6.0
    assert legendre_p_deriv(3, -1.0) == 6.0
    assert legendre_p_deriv(4, -1.0) == -10.0
    assert legendre_p_deriv(0, 1.0) == 0.0


def test_deriv_against_central_difference():
    h = 1e-6
    for k in (2, 7, 20):
        fd = (legendre_p(k, 0.4 + h) - legendre_p(k, 0.4 - h)) / (2 * h)
        d = legendre_p_deriv(k, 0.4)
        assert abs(d - fd) <= 1e-6 * max(1.0, abs(d))


def test_deriv_identity_residual():
    # (1 - x^2) P_k' - k (P_{k-1} - x P_k) stays at rounding level
    xs = np.linspace(-0.999, 0.999, 201)
    for k in (1, 7, 50, 200):
        for x in xs[::20]:
            lhs = (1 - x * x) * legendre_p_deriv(k, x)
            p_km1, p_k = legendre_pair(k - 1, x)
            rhs = k * (p_km1 - x * p_k)
            assert abs(lhs - rhs) <= 1e-11


def _cd_direct(k, x, y):
    return float(np.dot(legendre_l_row(k, x), legendre_l_row(k, y)))


def test_cd_kernel_k0():
    assert christoffel_darboux(0, 0.2, -0.8) == pytest.approx(0.5, abs=1e-15)


def test_cd_kernel_diagonal_small():
    got = christoffel_darboux(5, 0.3, 0.3)
    assert abs(got - _cd_direct(5, 0.3, 0.3)) <= 1e-11


def test_cd_kernel_generic_point():
    got = christoffel_darboux(64, 0.11, -0.42)
    want = _cd_direct(64, 0.11, -0.42)
    assert abs(got - want) <= 1e-9 * (1 + abs(want))


@settings(max_examples=200, deadline=None)
@given(
    k=st.integers(min_value=0, max_value=128),
    x=st.floats(min_value=-1.0, max_value=1.0, allow_nan=False),
    off=st.floats(min_value=-1e-6, max_value=1e-6, allow_nan=False),
    near=st.booleans(),
)
def test_cd_kernel_matches_direct_sum(k, x, off, near):
    y = min(1.0, max(-1.0, x + off)) if near else -x / 2 + 0.31
    got = christoffel_darboux(k, x, y)
    want = _cd_direct(k, x, y)
    assert abs(got - want) <= 1e-9 * (1 + abs(want))


def test_rule_order_one():
    rule = gauss_legendre_rule(1)
    assert rule.nodes[0] == pytest.approx(0.0, abs=1e-15)
    assert rule.weights[0] == pytest.approx(2.0, abs=1e-15)


def test_rule_order_two():
    rule = gauss_legendre_rule(2)
    assert rule.nodes == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)], abs=1e-15)
    assert rule.weights == pytest.approx([1.0, 1.0], abs=1e-14)


@pytest.mark.parametrize("order", [3, 17, 64, 300])
def test_rule_weight_sum_and_monotone_nodes(order):
    rule = gauss_legendre_rule(order)
    assert abs(rule.weights.sum() - 2.0) <= 1e-12
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(np.abs(rule.nodes) < 1)


def test_rule_polynomial_exactness():
    # order m integrates monomials up to degree 2m - 1 exactly
    rule = gauss_legendre_rule(6)
    for deg in range(12):
        want = 2.0 / (deg + 1) if deg % 2 == 0 else 0.0
        got = rule.integrate(rule.nodes**deg)
        assert abs(got - want) <= 1e-14


def test_orthonormality_600_nodes():
    rule = gauss_legendre_rule(600)
    table = legendre_l_table(256, rule.nodes)
    gram = (table * rule.weights) @ table.T
    assert np.abs(gram - np.eye(257)).max() <= 1e-9


def test_envelope_bound():
    # |L_k(x)| (1 - x^2)^(1/4) <= 1 for 1 <= k <= 500 on a fine grid
    xs = np.linspace(-1, 1, 10_000)[1:-1]
    table = legendre_l_table(500, xs)
    weighted = np.abs(table[1:]) * (1 - xs * xs) ** 0.25
    assert weighted.max() <= 1.0


def test_quadrature_rule_validation():
    with pytest.raises(ValueError):
        QuadratureRule(nodes=np.array([0.5, -0.5]), weights=np.array([1.0, 1.0]), order=2)
    with pytest.raises(ValueError):
        QuadratureRule(nodes=np.array([-0.5, 0.5]), weights=np.array([1.0, -1.0]), order=2)
    with pytest.raises(ValueError):
        gauss_legendre_rule(0)
