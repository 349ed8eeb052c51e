"""Induced para-Hermitian structure and its axiom residuals."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from affinejet import jets
from affinejet.bundle import (NotEquiaffine, build_induced,
                              classical_duality_residual, cubic_tensor,
                              duality_residual, induced_bundle,
                              isomorphism_residual, lagrangian_residual,
                              para_hermitian_residuals,
                              pullback_metric_residual,
                              relative_torsion_residual)
from affinejet.immersion import ImmersionSpec, decompose
from affinejet.tensors import ConnectionAtPoint, cov_deriv_02

CUBIC = "(x1^3 + x2^3)/6"

GRAPH_CUBIC = ImmersionSpec.from_strings(
    2, ["x1", "x2", CUBIC], ["0", "0", "1"], [[-1, 1], [-1, 1]], "graph cubic")

GRAPH_QUADRATIC = ImmersionSpec.from_strings(
    2, ["x1", "x2", "(x1^2 + x2^2)/2"], ["0", "0", "1"],
    [[-1, 1], [-1, 1]], "graph quadratic")

GRAPH_CUBIC_3D = ImmersionSpec.from_strings(
    3, ["x1", "x2", "x3", "(x1^3 + x2^3 + x3^3)/6"], ["0", "0", "0", "1"],
    [[-1, 1]] * 3, "graph cubic 3d")

CENTRO_CUBIC = ImmersionSpec.from_strings(
    2, ["x1", "x2", "x1^3 + x2^3 + 1"],
    ["-x1", "-x2", "-(x1^3 + x2^3 + 1)"],
    [[-0.21, 0.21]] * 2, "centroaffine cubic")

FLAT_PLANE = ImmersionSpec.from_strings(
    2, ["x1", "x2", "0"], ["0", "0", "1"], [[-1, 1], [-1, 1]], "flat plane")

CYLINDER = ImmersionSpec.from_strings(
    2, ["cos(t)", "sin(t)", "t + x2"], ["-cos(t)", "-sin(t)", "0"],
    [[0.0, 6.283185307179586], [-1.0, 1.0]], "cylinder")

TILTED = ImmersionSpec.from_strings(
    2, ["x1", "x2", CUBIC], ["0", "0", "1 + x1"],
    [[-1, 1], [-1, 1]], "tilted")


def vals(a):
    out = np.empty(a.shape)
    for idx in np.ndindex(a.shape):
        out[idx] = a[idx].value
    return out


def test_build_induced_closed_forms():
    b = build_induced(GRAPH_CUBIC, (0.7, -0.3), order=1)
    np.testing.assert_allclose(vals(b.phi_plus), np.eye(2), atol=0)
    np.testing.assert_allclose(vals(b.phi_minus), np.diag([0.7, -0.3]),
                               atol=1e-14)
    assert np.max(np.abs(vals(b.omega_plus))) <= 1e-14
    assert np.max(np.abs(vals(b.omega_minus))) <= 1e-14

    b = build_induced(CYLINDER, (0.785398, 0.5), order=1)
    np.testing.assert_allclose(vals(b.phi_minus), np.diag([1.0, 0.0]),
                               atol=1e-13)
    assert np.max(np.abs(vals(b.omega_plus))) <= 1e-13

    b = build_induced(FLAT_PLANE, (0.3, 0.3), order=1)
    assert np.max(np.abs(vals(b.phi_minus))) == 0.0


def test_build_induced_refuses_non_equiaffine():
    with pytest.raises(NotEquiaffine, match="tau"):
        build_induced(TILTED, (0.7, -0.3), order=1)
    d = decompose(TILTED, (0.7, -0.3), order=1)
    b = induced_bundle(d, allow_non_equiaffine=True)
    assert b.n == 2


def test_para_hermitian_axioms_exact():
    for spec, p in [(GRAPH_CUBIC, (0.7, -0.3)), (CENTRO_CUBIC, (0.2, 0.1)),
                    (GRAPH_CUBIC_3D, (0.3, -0.2, 0.5))]:
        b = build_induced(spec, p, order=1)
        for name, residual in para_hermitian_residuals(b).items():
            assert residual == 0.0, name


def test_lagrangian_residual():
    for spec, p in [(GRAPH_CUBIC, (0.7, -0.3)), (CENTRO_CUBIC, (0.2, 0.1)),
                    (CYLINDER, (1.0, 0.5))]:
        assert lagrangian_residual(build_induced(spec, p, order=1)) < 1e-10

    b = build_induced(GRAPH_CUBIC, (0.7, -0.3), order=1)
    P = b.phi_minus.copy()
    P[0, 1] = P[0, 1] + 1e-3
    broken = dataclasses.replace(b, phi_minus=P)
    assert lagrangian_residual(broken) == pytest.approx(5e-4, rel=1e-6)


def test_duality_residual():
    for spec, p in [(GRAPH_CUBIC, (0.7, -0.3)), (CENTRO_CUBIC, (0.2, 0.1))]:
        assert duality_residual(build_induced(spec, p, order=1)) < 1e-10

    b = build_induced(CENTRO_CUBIC, (0.2, 0.1), order=1)
    space = b.omega_minus.flat[0].space
    zeros = np.full((2, 2, 2), jets.constant(space, 0.0), dtype=object)
    halved = dataclasses.replace(b, omega_minus=zeros)
    d = decompose(CENTRO_CUBIC, (0.2, 0.1), order=1)
    gmax = np.max(np.abs(d.gamma_values()))
    assert gmax > 0.1
    assert duality_residual(halved) == pytest.approx(gmax, rel=1e-12)


def test_relative_torsion_both_sides():
    for spec, p in [(GRAPH_CUBIC, (0.7, -0.3)), (CENTRO_CUBIC, (0.2, 0.1)),
                    (CYLINDER, (1.0, 0.5)), (GRAPH_QUADRATIC, (0.4, 0.1))]:
        b = build_induced(spec, p, order=1)
        assert relative_torsion_residual(b, "plus") < 1e-8
        assert relative_torsion_residual(b, "minus") < 1e-8
    with pytest.raises(ValueError, match="side"):
        relative_torsion_residual(b, "sideways")


def test_cubic_tensor_graph_and_centroaffine():
    b = build_induced(GRAPH_CUBIC, (0.7, -0.3), order=1)
    C, res = cubic_tensor(b)
    want = np.zeros((2, 2, 2))
    want[0, 0, 0] = 1.0
    want[1, 1, 1] = 1.0
    np.testing.assert_allclose(C, want, atol=1e-13)
    assert res["cubic_matches_nabla_h"] < 1e-8
    assert res["cubic_total_symmetry"] < 1e-8

    d = decompose(CENTRO_CUBIC, (0.2, 0.1), order=1)
    b = induced_bundle(d)
    C, res = cubic_tensor(b)
    assert res["cubic_matches_nabla_h"] < 1e-8
    assert res["cubic_total_symmetry"] < 1e-8
    # cross-check against the tangent-side covariant derivative
    nh = cov_deriv_02(ConnectionAtPoint(2, d.gamma), d.h)
    np.testing.assert_allclose(C, nh, atol=1e-12)

    C, res = cubic_tensor(build_induced(FLAT_PLANE, (0.1, 0.9), order=1))
    assert np.max(np.abs(C)) == 0.0


def test_torsion_and_symmetry_fail_jointly_off_equiaffine():
    d = decompose(TILTED, (0.7, -0.3), order=1)
    b = induced_bundle(d, allow_non_equiaffine=True)
    torsion = relative_torsion_residual(b, "minus")
    _, res = cubic_tensor(b)
    assert torsion > 1e-8
    assert res["cubic_total_symmetry"] > 1e-8
    # equivalence holds in the passing direction on good data too
    good = build_induced(GRAPH_CUBIC, (0.7, -0.3), order=1)
    assert relative_torsion_residual(good, "minus") < 1e-8
    assert cubic_tensor(good)[1]["cubic_total_symmetry"] < 1e-8


def test_pullback_metric():
    for spec, p in [(GRAPH_CUBIC, (0.7, -0.3)), (CENTRO_CUBIC, (0.2, 0.1)),
                    (CYLINDER, (1.0, 0.5)), (FLAT_PLANE, (0.0, 0.0))]:
        d = decompose(spec, p, order=1)
        b = induced_bundle(d)
        assert pullback_metric_residual(b, d) < 1e-9

    d = decompose(GRAPH_CUBIC, (0.7, -0.3), order=1)
    b = induced_bundle(d)
    P = b.phi_minus.copy()
    P[1, 0] = P[1, 0] + 1e-3
    broken = dataclasses.replace(b, phi_minus=P)
    assert pullback_metric_residual(broken, d) == pytest.approx(1e-3, rel=1e-6)


def test_classical_duality_of_conjugate_connection():
    cases = [(GRAPH_QUADRATIC, (0.4, 0.1)), (GRAPH_QUADRATIC, (-0.3, 0.8)),
             (CENTRO_CUBIC, (0.2, 0.1)), (CENTRO_CUBIC, (-0.15, 0.1)),
             (GRAPH_CUBIC, (0.7, -0.3))]
    for spec, p in cases:
        d = decompose(spec, p, order=1)
        b = induced_bundle(d)
        assert classical_duality_residual(b, d) < 1e-8, spec.label


def test_isomorphism_identity_and_reframing():
    d = decompose(CENTRO_CUBIC, (0.2, 0.1), order=1)
    b1 = induced_bundle(d)
    space = jets.jet_space(2, 1)
    n = 2

    def const_matrix(M):
        out = np.empty(M.shape, dtype=object)
        for idx in np.ndindex(M.shape):
            out[idx] = jets.constant(space, float(M[idx]))
        return out

    ident = const_matrix(np.eye(2 * n))
    res = isomorphism_residual(b1, b1, ident)
    assert all(v == 0.0 for v in res.values())

    # change of frame preserving the pairing: Fm = inverse-transpose of Fp
    rng = np.random.default_rng(21)
    Fp = rng.uniform(-1, 1, (n, n)) + 2.0 * np.eye(n)
    Fm = np.linalg.inv(Fp).T
    Fpi, Fmi = np.linalg.inv(Fp), np.linalg.inv(Fm)

    def transform(coeff, M):
        out = np.empty((n, n), dtype=object)
        for b_, i in np.ndindex(n, n):
            out[b_, i] = sum(float(M[b_, m]) * coeff[m, i] for m in range(n))
        return out

    def transform_omega(om, M, Mi):
        out = np.empty((n, n, n), dtype=object)
        for k, b_, a in np.ndindex(n, n, n):
            out[k, b_, a] = sum(
                float(M[b_, m]) * om[k, m, mm] * float(Mi[mm, a])
                for m in range(n) for mm in range(n))
        return out

    b2 = dataclasses.replace(
        b1,
        phi_plus=transform(b1.phi_plus, Fp),
        phi_minus=transform(b1.phi_minus, Fm),
        omega_plus=transform_omega(b1.omega_plus, Fp, Fpi),
        omega_minus=transform_omega(b1.omega_minus, Fm, Fmi))

    F = np.zeros((2 * n, 2 * n))
    F[:n, :n] = Fp
    F[n:, n:] = Fm
    res = isomorphism_residual(b1, b2, const_matrix(F))
    for name, v in res.items():
        assert v < 1e-8, (name, v)


def test_isomorphism_detects_unmatched_scaling():
    d = decompose(CENTRO_CUBIC, (0.2, 0.1), order=1)
    b1 = induced_bundle(d)
    n = 2
    space = jets.jet_space(2, 1)
    scaled_P = np.empty((n, n), dtype=object)
    for idx in np.ndindex(n, n):
        scaled_P[idx] = 2.0 * b1.phi_minus[idx]
    b2 = dataclasses.replace(b1, phi_minus=scaled_P)

    F = np.eye(2 * n)
    F[n:, n:] *= 2.0
    Fj = np.empty((2 * n, 2 * n), dtype=object)
    for idx in np.ndindex(Fj.shape):
        Fj[idx] = jets.constant(space, float(F[idx]))
    res = isomorphism_residual(b1, b2, Fj)
    assert res["maps_phi"] < 1e-12
    assert res["intertwines_involution"] == 0.0
    assert res["intertwines_connections"] < 1e-12
    assert res["preserves_metric"] >= 0.4
