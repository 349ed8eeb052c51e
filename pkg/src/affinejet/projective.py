"""Curvature certificates on the dual-frame side of a coherent bundle.

The dual-frame connection of a coherent bundle structure carries its own
curvature. This module checks when that curvature factors through the
bundle map with a shape-like tensor, how it transforms under projective
changes of the connection, and how pre-geodesics respond to the same
changes.

Index conventions follow bundle.py: omega[k, b, a] are the coefficients
of the covariant derivative in coordinate direction k acting on the a-th
dual frame section, expanded on the b-th section. Curvature components
are stored curv[b, a, i, j], antisymmetric in (i, j):

    R(d_i, d_j) beta^a = curv[b, a, i, j] beta^b.

A shape-like tensor ("shape term") is a jet array term[a, i] pairing a
coordinate direction i with a dual section index a; for the structure
induced by an immersion the canonical choice is (n-1) times the shape
operator. Residual helpers return plain floats per point, as in
bundle.py; grid aggregation lives in the check suites.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Sequence

import numpy as np

from . import jets, tensors, report
from .bundle import CoherentBundleData, _section_derivative, _values
from .immersion import InducedData

# Denominator guard in the normalized pre-geodesic defect; keeps the
# ratio zero when both factors vanish without perturbing any real scale.
DEFECT_EPSILON = 1e-300


def _curvature_of_omega(omega: np.ndarray) -> np.ndarray:
    """Curvature jets curv[b, a, i, j] of connection coefficients
    omega[k, b, a]; exact antisymmetry in (i, j) by mirroring."""
    space = omega.flat[0].space
    if space.order < 1:
        raise ValueError("curvature needs connection jets of order >= 1")
    n = omega.shape[0]
    out_order = space.order - 1

    def t(g: jets.Jet) -> jets.Jet:
        return jets.truncate(g, out_order)

    zero = jets.constant(jets.jet_space(space.dim, out_order), 0.0)
    curv = np.empty((n, n, n, n), dtype=object)
    for b in range(n):
        for a in range(n):
            for i in range(n):
                curv[b, a, i, i] = zero
                for j in range(i + 1, n):
                    val = jets.derivative(omega[j, b, a], i) \
                        - jets.derivative(omega[i, b, a], j)
                    for m in range(n):
                        val = val + t(omega[i, b, m]) * t(omega[j, m, a]) \
                            - t(omega[j, b, m]) * t(omega[i, m, a])
                    curv[b, a, i, j] = val
                    curv[b, a, j, i] = -val
    return curv


def dual_curvature(b: CoherentBundleData) -> np.ndarray:
    """Curvature values of the dual-frame connection, curv[b, a, i, j].

    For the structure induced by an immersion this equals minus the
    transpose (in the first two slots) of the tangent curvature tensor.
    """
    return _values(_curvature_of_omega(b.omega_minus))


def scaled_shape_tensor(data: InducedData) -> np.ndarray:
    """The canonical shape term of an induced structure: jets
    term[a, i] = (n - 1) S^a_i."""
    n = data.n
    out = np.empty((n, n), dtype=object)
    for a in range(n):
        for i in range(n):
            out[a, i] = float(n - 1) * data.shape[a, i]
    return out


def _plus_side_gamma(b: CoherentBundleData) -> np.ndarray:
    # omega_plus[k, b, a] stores Gamma^b_{ka}; reorder to gamma[k, i, j]
    return b.omega_plus.transpose(1, 0, 2)


def curvature_factorization_residuals(curv: np.ndarray, shape_term: np.ndarray,
                                      b: CoherentBundleData) -> dict[str, float]:
    """Does the dual-frame curvature factor through the bundle map?

    The identity under test:

        curv[b, a, i, j] = (term[a, j] P[b, i] - term[a, i] P[b, j]) / (n - 1)

    with P the bundle map matrix. Returns that residual together with
    the tangent-side Gauss residual computed from the same structure
    (plus-side connection, pairing metric, shape term / (n-1)); the two
    certify the same identity from the two sides of the bundle and must
    pass or fail together.
    """
    n = b.n
    P = _values(b.phi_minus)
    term = _values(shape_term)
    expected = (np.einsum("aj,bi->baij", term, P)
                - np.einsum("ai,bj->baij", term, P)) / float(n - 1)
    r_factor = float(np.max(np.abs(curv - expected)))

    R = tensors._values(tensors._curvature_jets(_plus_side_gamma(b)))
    h = P.T
    S = term / float(n - 1)
    gauss = R - (np.einsum("jk,li->lkij", h, S)
                 - np.einsum("ik,lj->lkij", h, S))
    return {"curvature_factorization": r_factor,
            "gauss_equation": float(np.max(np.abs(gauss)))}


def shape_term_codazzi_residuals(shape_term: np.ndarray,
                                 b: CoherentBundleData) -> dict[str, float]:
    """Antisymmetrized first derivative of the shape term against the
    dual-frame connection:

        d_i term[k, j] - d_j term[k, i]
          - sum_b (omega-[i, b, k] term[b, j] - omega-[j, b, k] term[b, i])

    Zero iff the shape term satisfies the Codazzi-type equation of the
    dual frame side. Cross-reports the tangent-side Codazzi residual of
    term / (n-1) under the plus-side connection; the two must pass or
    fail together when the structure is induced by an equiaffine
    immersion.
    """
    n = b.n
    om = _values(b.omega_minus)
    term = _values(shape_term)
    dterm = np.empty((n, n, n))  # dterm[k, a, i] = d_k term[a, i]
    for k in range(n):
        for a in range(n):
            for i in range(n):
                dterm[k, a, i] = jets.derivative(shape_term[a, i], k).value
    worst = 0.0
    for k in range(n):
        for i in range(n):
            for j in range(i + 1, n):
                val = dterm[i, k, j] - dterm[j, k, i]
                for c in range(n):
                    val -= om[i, c, k] * term[c, j] - om[j, c, k] * term[c, i]
                worst = max(worst, abs(float(val)))

    gamma = _plus_side_gamma(b)
    s_jets = np.empty((n, n), dtype=object)
    for a in range(n):
        for i in range(n):
            s_jets[a, i] = (1.0 / (n - 1)) * shape_term[a, i]
    cov = tensors._values(tensors._cov_deriv_11_jets(gamma, s_jets))
    tangent = float(np.max(np.abs(cov - np.swapaxes(cov, 0, 2))))
    return {"shape_term_codazzi": worst, "shape_codazzi_tangent": tangent}


def curvature_trace_residuals(curv: np.ndarray,
                              data: InducedData | None = None) -> dict[str, float]:
    """Trace of the dual-frame curvature over the section slots.

    Vanishing of trace(curv)[i, j] = sum_a curv[a, a, i, j] is the dual
    counterpart of the symmetry of h(S., .); when induced data is
    supplied the symmetry defect max |h(SX, Y) - h(SY, X)| is reported
    alongside so the two verdicts can be compared.
    """
    tr = np.einsum("aaij->ij", curv)
    out = {"curvature_trace": float(np.max(np.abs(tr)))}
    if data is not None:
        h = data.h_values()
        s = data.shape_values()
        m = np.einsum("mi,mj->ij", s, h)  # h(S d_i, d_j)
        out["shape_metric_symmetry"] = float(np.max(np.abs(m - m.T)))
    return out


def _as_rho_jets(b: CoherentBundleData, rho: Sequence) -> np.ndarray:
    space = b.omega_minus.flat[0].space
    out = np.empty(b.n, dtype=object)
    for a in range(b.n):
        r = rho[a]
        out[a] = r if isinstance(r, jets.Jet) else jets.constant(space, float(r))
    return out


def _pairing_covector(b: CoherentBundleData, rho: np.ndarray) -> np.ndarray:
    """g[k] = sum_c rho[c] P[c, k], the covector rho pulled back through
    the bundle map."""
    n = b.n
    g = np.empty(n, dtype=object)
    for k in range(n):
        s = rho[0] * b.phi_minus[0, k]
        for c in range(1, n):
            s = s + rho[c] * b.phi_minus[c, k]
        g[k] = s
    return g


def projective_change_bundle(b: CoherentBundleData, rho: Sequence) -> CoherentBundleData:
    """Projective change of the dual-frame connection by the covector rho
    (components rho[a] against the dual sections; floats or jets):

        new omega[k, b, a] = omega[k, b, a] + g[k] delta_{ba}
                             + rho[a] P[b, k],  g[k] = sum_c rho[c] P[c, k].

    The bundle map and the plus side are untouched. The map is additive
    in rho, so changing by rho and then by -rho restores the original
    coefficients (up to roundoff).
    """
    n = b.n
    rho = _as_rho_jets(b, rho)
    g = _pairing_covector(b, rho)
    new = np.empty((n, n, n), dtype=object)
    for k in range(n):
        for bb in range(n):
            for a in range(n):
                val = b.omega_minus[k, bb, a] + rho[a] * b.phi_minus[bb, k]
                if bb == a:
                    val = val + g[k]
                new[k, bb, a] = val
    return dataclasses.replace(b, omega_minus=new)


def curvature_change_residual(b: CoherentBundleData, rho: Sequence) -> float:
    """Check the transformation law of the dual-frame curvature under a
    projective change, assuming the original connection is relatively
    torsion-free for the bundle map:

        new_curv[b,a,i,j] = curv[b,a,i,j]
            - D[j,a] P[b,i] + D[i,a] P[b,j]
            + (d_i g[j] - d_j g[i]) delta_{ba}

    with D[k,a] = d_k rho[a] - sum_c omega[k,c,a] rho[c] - g[k] rho[a].
    Returns the max-abs gap between the recomputed curvature of the
    changed connection and the right-hand side.
    """
    n = b.n
    rho = _as_rho_jets(b, rho)
    changed = projective_change_bundle(b, rho)
    new_curv = dual_curvature(changed)
    curv = dual_curvature(b)

    P = _values(b.phi_minus)
    om = _values(b.omega_minus)
    rv = np.array([r.value for r in rho])
    g = _pairing_covector(b, rho)
    dg = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            dg[i, j] = jets.derivative(g[j], i).value
    D = np.zeros((n, n))
    for k in range(n):
        for a in range(n):
            D[k, a] = jets.derivative(rho[a], k).value \
                - float(np.dot(om[k, :, a], rv)) \
                - g[k].value * rv[a]
    want = curv.copy()
    want -= np.einsum("ja,bi->baij", D, P)
    want += np.einsum("ia,bj->baij", D, P)
    skew = dg - dg.T  # d_i g[j] - d_j g[i]
    for bb in range(n):
        want[bb, bb] += skew
    return float(np.max(np.abs(new_curv - want)))


def flattening_shape_term(b: CoherentBundleData, rho: Sequence) -> np.ndarray:
    """Shape term certifying a connection that a projective change
    flattens.

    If changing b's dual-frame connection by -rho yields a flat
    connection, then b's curvature factors through the bundle map with

        term[a, k] = (n - 1) { -d_k rho[a] + sum_c omega[k, c, a] rho[c]
                               - g[k] rho[a] }

    built from b's own (already changed) coefficients. Returned as jets
    one order below rho.
    """
    n = b.n
    rho = _as_rho_jets(b, rho)
    g = _pairing_covector(b, rho)
    order = rho[0].space.order - 1
    if order < 0:
        raise ValueError("rho jets must carry at least first derivatives")

    def t(x: jets.Jet) -> jets.Jet:
        return jets.truncate(x, order)

    out = np.empty((n, n), dtype=object)
    for a in range(n):
        for k in range(n):
            val = -jets.derivative(rho[a], k) - t(g[k]) * t(rho[a])
            for c in range(n):
                val = val + t(b.omega_minus[k, c, a]) * t(rho[c])
            out[a, k] = float(n - 1) * val
    return out


def bundle_map_rank(b: CoherentBundleData, threshold: float = 1e-8) -> int:
    """Numerical rank of the bundle map matrix (relative SVD cutoff)."""
    s = np.linalg.svd(_values(b.phi_minus), compute_uv=False)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.sum(s > threshold * s[0]))


def second_bianchi_residual(b: CoherentBundleData) -> float:
    """Structure-equation residual d curv = curv ^ omega - omega ^ curv
    for the dual-frame connection, evaluated on all coordinate triples
    k < i < j. Identically zero when n < 3; needs omega jets of order
    >= 2 otherwise."""
    n = b.n
    if n < 3:
        return 0.0
    omega = b.omega_minus
    if omega.flat[0].space.order < 2:
        raise ValueError("second Bianchi residual needs omega jets of order >= 2")
    curv = _curvature_of_omega(omega)
    omv = _values(omega)
    cv = _values(curv)

    def dcurv(bb: int, a: int, k: int, i: int, j: int) -> float:
        return jets.derivative(curv[bb, a, i, j], k).value

    worst = 0.0
    for bb in range(n):
        for a in range(n):
            for k in range(n):
                for i in range(k + 1, n):
                    for j in range(i + 1, n):
                        lhs = dcurv(bb, a, k, i, j) + dcurv(bb, a, i, j, k) \
                            + dcurv(bb, a, j, k, i)
                        rhs = 0.0
                        for m in range(n):
                            rhs += cv[bb, m, k, i] * omv[j, m, a] \
                                + cv[bb, m, i, j] * omv[k, m, a] \
                                + cv[bb, m, j, k] * omv[i, m, a]
                            rhs -= omv[k, bb, m] * cv[m, a, i, j] \
                                + omv[i, bb, m] * cv[m, a, j, k] \
                                + omv[j, bb, m] * cv[m, a, k, i]
                        worst = max(worst, abs(lhs - rhs))
    return worst


def wedge_norm(u: np.ndarray, w: np.ndarray) -> float:
    """Frobenius norm of the antisymmetrized outer product: the root of
    the sum of squared 2x2 minors. Zero iff u and w are parallel."""
    g = np.outer(u, w) - np.outer(w, u)
    return float(np.sqrt(0.5 * np.sum(g * g)))


def integrate_geodesic(gamma_at: Callable[[np.ndarray], np.ndarray],
                       c0: Sequence[float], v0: Sequence[float],
                       steps: int = 500, dt: float = 1e-3,
                       on_exit: str = "raise") -> tuple[np.ndarray, np.ndarray]:
    """Integrate the geodesic equation x'' = -gamma(x)(x', x') with
    classical RK4. gamma_at maps a point to connection values [k, i, j].

    Returns positions and velocities, one row per retained step. A
    DomainExit raised by gamma_at propagates when on_exit="raise" and
    truncates the trajectory when on_exit="truncate".
    """
    if on_exit not in ("raise", "truncate"):
        raise ValueError(f"on_exit must be 'raise' or 'truncate', got {on_exit!r}")
    x = np.array(c0, dtype=float)
    v = np.array(v0, dtype=float)
    n = x.shape[0]
    xs = np.empty((steps + 1, n))
    vs = np.empty((steps + 1, n))
    xs[0], vs[0] = x, v

    def acc(xx: np.ndarray, vv: np.ndarray) -> np.ndarray:
        return -np.einsum("kij,i,j->k", gamma_at(xx), vv, vv)

    kept = 0
    try:
        for s in range(steps):
            k1x, k1v = v, acc(x, v)
            k2x = v + 0.5 * dt * k1v
            k2v = acc(x + 0.5 * dt * k1x, k2x)
            k3x = v + 0.5 * dt * k2v
            k3v = acc(x + 0.5 * dt * k2x, k3x)
            k4x = v + dt * k3v
            k4v = acc(x + dt * k3x, k4x)
            x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            v = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            xs[s + 1], vs[s + 1] = x, v
            kept = s + 1
    except jets.EvaluationError:
        if on_exit == "raise":
            raise
    return xs[:kept + 1], vs[:kept + 1]


def pre_geodesic_residual(gamma_at: Callable[[np.ndarray], np.ndarray],
                          c0: Sequence[float], v0: Sequence[float],
                          steps: int = 500, dt: float = 1e-3,
                          changed_gamma_at: Callable[[np.ndarray], np.ndarray] | None = None,
                          tolerance: float = 1e-6,
                          on_exit: str = "raise",
                          name: str = "pre_geodesic") -> report.ResidualReport:
    """Parallelism defect of a second connection along geodesics of the
    first.

    Along the gamma_at-geodesic through (c0, v0) the acceleration under
    the changed connection reduces to (changed - base)(v, v); the defect

        |D ^ v| / (|D| |v| + eps),  D = (changed - base)(v, v)

    vanishes iff the curve is a pre-geodesic of the changed connection.
    With no changed connection the defect is identically zero (the curve
    is its own geodesic). Returns a per-step residual report.
    """
    xs, vs = integrate_geodesic(gamma_at, c0, v0, steps=steps, dt=dt,
                                on_exit=on_exit)
    samples = []
    for x, v in zip(xs, vs):
        if changed_gamma_at is None:
            samples.append((tuple(x), 0.0))
            continue
        diff = changed_gamma_at(x) - gamma_at(x)
        d = np.einsum("kij,i,j->k", diff, v, v)
        num = wedge_norm(d, v)
        den = float(np.linalg.norm(d) * np.linalg.norm(v)) + DEFECT_EPSILON
        samples.append((tuple(x), num / den))
    return report.from_samples(name, samples, tolerance)


def velocity_image_pair(b: CoherentBundleData, v: Sequence[float],
                        vdot: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """First two derivative levels of the bundle image of a curve:
    w0 = P v (the image of the velocity) and w1, the dual-frame covariant
    derivative of that image along the curve, for a curve through b.point
    with velocity v and acceleration vdot.

    A curve is a bundle pre-geodesic when w0 and w1 stay linearly
    dependent; wedge_norm(w0, w1) measures the defect at this point, and
    that wedge is invariant under projective_change_bundle.
    """
    v = np.asarray(v, dtype=float)
    vdot = np.asarray(vdot, dtype=float)
    P = _values(b.phi_minus)
    V = _values(_section_derivative(b.phi_minus, b.omega_minus))  # [b, k, i]
    w0 = P @ v
    w1 = np.einsum("bki,k,i->b", V, v, v) + P @ vdot
    return w0, w1
