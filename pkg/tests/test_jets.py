"""Jet arithmetic against series identities and finite-difference oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest

from affinejet import jets
from affinejet.jets import (EvaluationError, FrameDegenerate, Jet, constant,
                            derivative, jet_space, linear_solve, powi,
                            truncate, variable)

from oracles import all_alphas, central_diff, taylor_coefficient


def test_graded_enumeration_d2_k2():
    s = jet_space(2, 2)
    assert s.alphas == ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))
    assert s.size == 6


def test_space_sizes_are_binomials():
    for d in (1, 2, 3, 4, 6):
        for k in range(5):
            assert jet_space(d, k).size == math.comb(d + k, k)


def test_truncation_is_graded_prefix():
    s = jet_space(3, 4)
    lower = jet_space(3, 2)
    assert s.alphas[:lower.size] == lower.alphas


def test_sin_maclaurin_order3():
    t = variable(jet_space(1, 3), 0, 0.0)
    np.testing.assert_allclose(jets.sin(t).c, [0.0, 1.0, 0.0, -1.0 / 6.0],
                               atol=1e-15)


def test_exp_maclaurin_order2():
    x = variable(jet_space(1, 2), 0, 0.0)
    np.testing.assert_allclose(jets.exp(x).c, [1.0, 1.0, 0.5], atol=1e-15)


def test_reciprocal_at_two_order2():
    x = variable(jet_space(1, 2), 0, 2.0)
    np.testing.assert_allclose((1.0 / x).c, [0.5, -0.25, 0.125], atol=1e-15)


def test_cos_coefficients_match_finite_differences():
    s = jet_space(1, 3)
    j = jets.cos(variable(s, 0, math.pi / 4))
    for m, alpha in enumerate(s.alphas):
        want = taylor_coefficient(lambda y: math.cos(y[0]), [math.pi / 4],
                                  alpha)
        assert j.c[m] == pytest.approx(want, abs=1e-6)


def test_product_against_fd_oracle_step_1e4():
    # Step 1e-4 plain central differences, 1e-6 relative, first order.
    rng = np.random.default_rng(7)
    a_coef = rng.uniform(-1, 1, size=6)
    b_coef = rng.uniform(-1, 1, size=6)

    def poly(coef, y):
        x1, x2 = y
        return (coef[0] + coef[1] * x1 + coef[2] * x2 + coef[3] * x1 * x2
                + coef[4] * x1 ** 2 + coef[5] * x2 ** 2)

    def prod(y):
        return poly(a_coef, y) * poly(b_coef, y)

    p = [0.3, -0.4]
    s = jet_space(2, 2)
    x1, x2 = variable(s, 0, p[0]), variable(s, 1, p[1])

    def poly_jet(coef):
        return (coef[0] + coef[1] * x1 + coef[2] * x2 + coef[3] * x1 * x2
                + coef[4] * x1 * x1 + coef[5] * x2 * x2)

    j = poly_jet(a_coef) * poly_jet(b_coef)
    for alpha in ((1, 0), (0, 1)):
        fd = central_diff(prod, p, alpha, h=1e-4, richardson=False)
        got = j.coeff(alpha)
        assert got == pytest.approx(fd, rel=1e-6)


def _randomized_atom_cases(rng):
    # One case per supported atom; base points keep sqrt and div away
    # from their singular loci.
    def lin(y, c):
        return c[0] + c[1] * y[0] + c[2] * y[1]

    c1 = rng.uniform(0.5, 1.5, size=3)
    c2 = rng.uniform(0.2, 0.8, size=3)
    cases = [
        ("add", lambda y: lin(y, c1) + lin(y, c2),
         lambda x1, x2: (c1[0] + c1[1] * x1 + c1[2] * x2)
         + (c2[0] + c2[1] * x1 + c2[2] * x2)),
        ("sub", lambda y: lin(y, c1) - math.sin(lin(y, c2)),
         lambda x1, x2: (c1[0] + c1[1] * x1 + c1[2] * x2)
         - jets.sin(c2[0] + c2[1] * x1 + c2[2] * x2)),
        ("mul", lambda y: lin(y, c1) * math.cos(y[0] * y[1]),
         lambda x1, x2: (c1[0] + c1[1] * x1 + c1[2] * x2)
         * jets.cos(x1 * x2)),
        ("div", lambda y: lin(y, c2) / lin(y, c1),
         lambda x1, x2: (c2[0] + c2[1] * x1 + c2[2] * x2)
         / (c1[0] + c1[1] * x1 + c1[2] * x2)),
        ("neg", lambda y: -lin(y, c1) ** 2,
         lambda x1, x2: -powi(c1[0] + c1[1] * x1 + c1[2] * x2, 2)),
        ("sin", lambda y: math.sin(lin(y, c1)),
         lambda x1, x2: jets.sin(c1[0] + c1[1] * x1 + c1[2] * x2)),
        ("cos", lambda y: math.cos(lin(y, c1)),
         lambda x1, x2: jets.cos(c1[0] + c1[1] * x1 + c1[2] * x2)),
        ("exp", lambda y: math.exp(lin(y, c2)),
         lambda x1, x2: jets.exp(c2[0] + c2[1] * x1 + c2[2] * x2)),
        ("sqrt", lambda y: math.sqrt(lin(y, c1)),
         lambda x1, x2: jets.sqrt(c1[0] + c1[1] * x1 + c1[2] * x2)),
        ("pow", lambda y: lin(y, c1) ** 3,
         lambda x1, x2: powi(c1[0] + c1[1] * x1 + c1[2] * x2, 3)),
        ("pow_neg", lambda y: lin(y, c1) ** (-2),
         lambda x1, x2: powi(c1[0] + c1[1] * x1 + c1[2] * x2, -2)),
    ]
    return cases


def test_every_atom_coefficient_matches_central_fd():
    # 1e-5 relative on every coefficient up to order 3.
    rng = np.random.default_rng(42)
    s = jet_space(2, 3)
    for trial in range(3):
        p = rng.uniform(0.1, 0.6, size=2)
        x1, x2 = variable(s, 0, p[0]), variable(s, 1, p[1])
        for name, scalar_fn, jet_fn in _randomized_atom_cases(rng):
            j = jet_fn(x1, x2)
            for alpha in all_alphas(2, 3):
                want = taylor_coefficient(scalar_fn, p, alpha)
                got = j.coeff(alpha)
                tol = 1e-5 * max(1e-3, abs(want))
                assert abs(got - want) <= tol, (name, alpha, got, want)


def test_derivative_drops_order_and_is_exact():
    s = jet_space(2, 3)
    x1, x2 = variable(s, 0, 0.5), variable(s, 1, -0.3)
    g = x1 * x1 * x2          # d/dx1 -> 2 x1 x2, d/dx2 -> x1^2
    d1 = derivative(g, 0)
    assert d1.space.order == 2
    h = 2.0 * x1 * x2
    np.testing.assert_allclose(d1.c, truncate(h, 2).c, atol=1e-15)
    d2 = derivative(g, 1)
    np.testing.assert_allclose(d2.c, truncate(x1 * x1, 2).c, atol=1e-15)


def test_division_and_sqrt_round_trip():
    s = jet_space(2, 4)
    x1, x2 = variable(s, 0, 0.7), variable(s, 1, 0.2)
    a = 1.0 + x1 * x2 + x2 * x2
    b = 2.0 + jets.sin(x1)
    np.testing.assert_allclose(((a * b) / b).c, a.c, atol=1e-13)
    np.testing.assert_allclose((jets.sqrt(a) * jets.sqrt(a)).c, a.c,
                               atol=1e-13)
    np.testing.assert_allclose((jets.exp(a) * jets.exp(-a)).c,
                               constant(s, 1.0).c, atol=1e-12)
    np.testing.assert_allclose(powi(a, 3).c, (a * a * a).c, atol=1e-13)
    np.testing.assert_allclose((powi(a, -2) * a * a).c, constant(s, 1.0).c,
                               atol=1e-13)


def test_sin_cos_pythagoras():
    s = jet_space(2, 4)
    a = variable(s, 0, 0.3) * variable(s, 1, 1.1) + 0.25
    lhs = jets.sin(a) * jets.sin(a) + jets.cos(a) * jets.cos(a)
    np.testing.assert_allclose(lhs.c, constant(s, 1.0).c, atol=1e-14)


def test_linear_solve_back_substitution():
    rng = np.random.default_rng(3)
    s = jet_space(2, 3)
    m = 3
    A = np.empty((m, m), dtype=object)
    X_true = np.empty((m, 2), dtype=object)
    for i in range(m):
        for j in range(m):
            c = rng.uniform(-1, 1, size=s.size)
            c[0] += 3.0 * (i == j)      # keep the value part well conditioned
            A[i, j] = Jet(s, c)
        for j in range(2):
            X_true[i, j] = Jet(s, rng.uniform(-1, 1, size=s.size))
    B = np.empty((m, 2), dtype=object)
    for i in range(m):
        for j in range(2):
            acc = constant(s, 0.0)
            for k in range(m):
                acc = acc + A[i, k] * X_true[k, j]
            B[i, j] = acc
    X = linear_solve(A, B)
    for i in range(m):
        for j in range(2):
            np.testing.assert_allclose(X[i, j].c, X_true[i, j].c, atol=1e-10)
            acc = constant(s, 0.0)
            for k in range(m):
                acc = acc + A[i, k] * X[k, j]
            resid = np.max(np.abs(acc.c - B[i, j].c))
            assert resid < 1e-10


def test_linear_solve_rejects_singular_value_part():
    s = jet_space(1, 2)
    x = variable(s, 0, 0.0)     # value part zero, higher parts nonzero
    A = np.array([[x, x], [x, x]], dtype=object)
    B = np.array([[constant(s, 1.0)], [constant(s, 0.0)]], dtype=object)
    with pytest.raises(FrameDegenerate):
        linear_solve(A, B)


def test_space_mixing_rejected():
    a = variable(jet_space(2, 2), 0, 1.0)
    b = variable(jet_space(2, 3), 0, 1.0)
    with pytest.raises(ValueError):
        _ = a + b


def test_division_by_zero_value_part():
    s = jet_space(1, 2)
    x = variable(s, 0, 0.0)
    with pytest.raises(EvaluationError):
        _ = 1.0 / x
    with pytest.raises(EvaluationError):
        jets.sqrt(constant(s, -1.0))


def test_order_cap():
    with pytest.raises(ValueError):
        jet_space(2, 5)


def test_coefficients_are_immutable():
    x = variable(jet_space(2, 2), 0, 1.0)
    with pytest.raises(ValueError):
        x.c[0] = 5.0
