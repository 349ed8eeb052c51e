"""Split para-Hermitian bundle carried by an equiaffine immersion.

The bundle is E = E+ (+) E- with E+ framed by the pushed-forward
coordinate fields and E- by the dual frame beta^j, <beta^j, e+_i> =
delta^j_i.  In this pair of frames the pairing

    theta(a+ (+) a-, b+ (+) b-) = (1/2){<b-, a+> + <a-, b+>}

is the constant matrix with half-identity off-diagonal blocks and the
involution is diag(+1, .., -1, ..); both carry no derivatives, so every
residual below reduces to component arithmetic.

Component conventions:

    phi_plus[b, i]       coefficient of e+_b in Phi+(d_i)  (identity when induced)
    phi_minus[b, i]      coefficient of beta^b in Phi-(d_i) (equals h[i, b] when induced)
    omega_plus[k, b, a]  nabla+_k e+_a = omega_plus[k,b,a] e+_b
    omega_minus[k, b, a] nabla-_k beta^a = omega_minus[k,b,a] beta^b

Residual helpers return plain per-point floats; grid aggregation into
reports happens in the check suites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from affinejet import jets, tensors
from affinejet.immersion import (EQUIAFFINE_TOLERANCE, ImmersionSpec,
                                 InducedData, decompose)


class NotEquiaffine(Exception):
    """The transversal field fails tau = 0, so the dual-frame
    representation of Phi- is not available."""


@dataclass(frozen=True)
class CoherentBundleData:
    n: int
    point: tuple[float, ...]
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    omega_plus: np.ndarray
    omega_minus: np.ndarray

    @property
    def order(self) -> int:
        return self.phi_plus.flat[0].space.order

    @property
    def theta_block(self) -> np.ndarray:
        th = np.zeros((2 * self.n, 2 * self.n))
        for i in range(self.n):
            th[i, self.n + i] = 0.5
            th[self.n + i, i] = 0.5
        return th

    @property
    def involution(self) -> np.ndarray:
        return np.diag([1.0] * self.n + [-1.0] * self.n)


def _values(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape)
    for idx in np.ndindex(a.shape):
        out[idx] = a[idx].value
    return out


def induced_bundle(data: InducedData,
                   tolerance: float = EQUIAFFINE_TOLERANCE,
                   allow_non_equiaffine: bool = False) -> CoherentBundleData:
    """Assemble the induced structure from decomposed immersion data.

    Refuses non-equiaffine input: with tau != 0 the image of the
    conormal differential has a component off the tangent span and the
    dual-frame matrix below would silently drop it.  The escape hatch
    exists only so tests can watch the axioms fail on such data.
    """
    defect = float(np.max(np.abs(data.tau_values())))
    if defect > tolerance and not allow_non_equiaffine:
        raise NotEquiaffine(
            f"max |tau| = {defect:.3e} exceeds {tolerance:.1e} at {data.point}")
    n = data.n
    space = data.h.flat[0].space
    one = jets.constant(space, 1.0)
    zero = jets.constant(space, 0.0)
    phi_plus = np.empty((n, n), dtype=object)
    phi_minus = np.empty((n, n), dtype=object)
    for b in range(n):
        for i in range(n):
            phi_plus[b, i] = one if b == i else zero
            phi_minus[b, i] = data.h[i, b]
    omega_plus = np.empty((n, n, n), dtype=object)
    omega_minus = np.empty((n, n, n), dtype=object)
    for k, b, a in np.ndindex(n, n, n):
        omega_plus[k, b, a] = data.gamma[b, k, a]
        omega_minus[k, b, a] = -data.gamma[a, k, b]
    return CoherentBundleData(n, data.point, phi_plus, phi_minus,
                              omega_plus, omega_minus)


def build_induced(spec: ImmersionSpec, p, order: int = 1,
                  tolerance: float = EQUIAFFINE_TOLERANCE) -> CoherentBundleData:
    return induced_bundle(decompose(spec, p, order), tolerance=tolerance)


def para_hermitian_residuals(b: CoherentBundleData) -> dict[str, float]:
    """Frame-constant axioms: theta symmetric and nondegenerate, the
    involution squares to the identity with theta(I.,.) + theta(.,I.) = 0.
    All four are exactly zero for any constructed structure."""
    th = b.theta_block
    iv = b.involution
    two_n = 2 * b.n
    return {
        "theta_symmetric": float(np.max(np.abs(th - th.T))),
        # 4*theta is the exact inverse of theta in this frame
        "theta_nondegenerate": float(np.max(np.abs(4.0 * th @ th
                                                   - np.eye(two_n)))),
        "involution_squares": float(np.max(np.abs(iv @ iv - np.eye(two_n)))),
        "theta_skew_compatible": float(np.max(np.abs(th @ iv + iv.T @ th))),
    }


def lagrangian_residual(b: CoherentBundleData) -> float:
    """theta(Phi X, I Phi Y): vanishes iff the image of Phi is isotropic
    for the symplectic form, which amounts to symmetry of the pullback."""
    Q = _values(b.phi_plus)
    P = _values(b.phi_minus)
    mix = P.T @ Q  # mix[i, j] = sum_b P[b,i] Q[b,j]
    return float(np.max(np.abs(0.5 * (mix - mix.T))))


def duality_residual(b: CoherentBundleData) -> float:
    """Leibniz defect of theta under (nabla+, nabla-), normalized by the
    frame pairing: max |omega_plus[k,j,i] + omega_minus[k,i,j]|."""
    wp = _values(b.omega_plus)
    wm = _values(b.omega_minus)
    return float(np.max(np.abs(wp + np.swapaxes(wm, 1, 2))))


def _section_derivative(coeff: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Covariant derivative of the frame sections spanned by coeff[., j]:
    out[b, i, j] = d_i coeff[b, j] + coeff[a, j] omega[i, b, a]."""
    n = coeff.shape[0]
    out_order = coeff.flat[0].space.order - 1
    if out_order < 0:
        raise ValueError("section derivative needs jets of order >= 1")

    def t(g: jets.Jet) -> jets.Jet:
        return jets.truncate(g, out_order)

    out = np.empty((n, n, n), dtype=object)
    for b, i, j in np.ndindex(n, n, n):
        val = jets.derivative(coeff[b, j], i)
        for a in range(n):
            val = val + t(omega[i, b, a]) * t(coeff[a, j])
        out[b, i, j] = val
    return out


def relative_torsion_residual(b: CoherentBundleData, side: str) -> float:
    """Antisymmetric part of the covariant derivative of Phi(side) in
    coordinate directions; zero iff Phi(side) is relatively torsion-free
    for its connection."""
    if side == "plus":
        d = _section_derivative(b.phi_plus, b.omega_plus)
    elif side == "minus":
        d = _section_derivative(b.phi_minus, b.omega_minus)
    else:
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    v = _values(d)
    return float(np.max(np.abs(v - np.swapaxes(v, 1, 2))))


def cubic_tensor(b: CoherentBundleData) -> tuple[np.ndarray, dict[str, float]]:
    """Cubic form C(X,Y,Z) = -2{theta(nabla+_X Phi+Y, Phi-Z) -
    theta(Phi+Z, nabla-_X Phi-Y)} in coordinates, indexed C[x, y, z].

    Returns the values together with two residuals: agreement with the
    covariant derivative of the pullback metric, and the total-symmetry
    defect over all index permutations.
    """
    n = b.n
    U = _section_derivative(b.phi_plus, b.omega_plus)
    V = _section_derivative(b.phi_minus, b.omega_minus)
    out_order = U.flat[0].space.order

    def t(g: jets.Jet) -> jets.Jet:
        return jets.truncate(g, out_order)

    C = np.empty((n, n, n))
    for i, j, k in np.ndindex(n, n, n):
        val = 0.0
        for bb in range(n):
            val += (t(b.phi_plus[bb, k]) * V[bb, i, j]
                    - U[bb, i, j] * t(b.phi_minus[bb, k])).value
        C[i, j, k] = val

    # pullback metric as jets, h[j, k] = phi_minus[k, j] for the induced
    # frame; its covariant derivative under omega_plus is the comparison
    gamma = np.empty((n, n, n), dtype=object)
    for m, i, j in np.ndindex(n, n, n):
        gamma[m, i, j] = b.omega_plus[i, m, j]
    nh = tensors._cov_deriv_02_jets(gamma, b.phi_minus.T)

    matches = float(np.max(np.abs(C - _values(nh))))
    symmetry = 0.0
    for perm in ((0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        symmetry = max(symmetry,
                       float(np.max(np.abs(C - np.transpose(C, perm)))))
    return C, {"cubic_matches_nabla_h": matches,
               "cubic_total_symmetry": symmetry}


def pullback_metric_residual(b: CoherentBundleData, data: InducedData) -> float:
    """max |2 theta(Phi+ d_i, Phi- d_j) - h_{ij}|."""
    Q = _values(b.phi_plus)
    P = _values(b.phi_minus)
    return float(np.max(np.abs(Q.T @ P - data.h_values())))


def conjugate_connection(b: CoherentBundleData) -> np.ndarray:
    """Connection on TM obtained by carrying nabla- back through Phi-,
    as jets gamma*[m, i, j]; requires Phi- invertible at the point."""
    n = b.n
    V = _section_derivative(b.phi_minus, b.omega_minus)
    out_order = V.flat[0].space.order
    A = np.empty((n, n), dtype=object)
    for bb, m in np.ndindex(n, n):
        A[bb, m] = jets.truncate(b.phi_minus[bb, m], out_order)
    B = np.empty((n, n * n), dtype=object)
    for bb, i, j in np.ndindex(n, n, n):
        B[bb, i * n + j] = V[bb, i, j]
    X = jets.linear_solve(A, B)
    out = np.empty((n, n, n), dtype=object)
    for m, i, j in np.ndindex(n, n, n):
        out[m, i, j] = X[m, i * n + j]
    return out


def classical_duality_residual(b: CoherentBundleData,
                               data: InducedData) -> float:
    """Defect of d_k h(Y,Z) = h(nabla_k Y, Z) + h(Y, nabla*_k Z) with
    nabla* = conjugate_connection(b); only meaningful where h is
    invertible."""
    n = b.n
    gs = _values(conjugate_connection(b))
    gv = data.gamma_values()
    hv = data.h_values()

    def unit(i: int) -> tuple[int, ...]:
        return tuple(1 if m == i else 0 for m in range(n))

    worst = 0.0
    for k, i, j in np.ndindex(n, n, n):
        dh = data.h[i, j].coeff(unit(k))
        both = sum(gv[m, k, i] * hv[m, j] + hv[i, m] * gs[m, k, j]
                   for m in range(n))
        worst = max(worst, abs(dh - both))
    return worst


def _full_connection(b: CoherentBundleData, k: int) -> np.ndarray:
    n = b.n
    space = b.omega_plus.flat[0].space
    W = np.empty((2 * n, 2 * n), dtype=object)
    W[...] = jets.constant(space, 0.0)
    W[:n, :n] = b.omega_plus[k]
    W[n:, n:] = b.omega_minus[k]
    return W


def isomorphism_residual(b1: CoherentBundleData, b2: CoherentBundleData,
                         F: np.ndarray) -> dict[str, float]:
    """Residuals of the four conditions for F : E1 -> E2 to identify the
    structures: it must carry Phi1 to Phi2, intertwine the involutions,
    pull theta2 back to theta1, and intertwine the connections.  F is a
    2n x 2n matrix of jets (order >= 1 for the connection condition).
    """
    n = b1.n
    if F.shape != (2 * n, 2 * n):
        raise ValueError(f"F must be {2 * n} x {2 * n}, got {F.shape}")
    Fv = _values(F)

    phi1 = np.vstack([_values(b1.phi_plus), _values(b1.phi_minus)])
    phi2 = np.vstack([_values(b2.phi_plus), _values(b2.phi_minus)])
    maps_phi = float(np.max(np.abs(Fv @ phi1 - phi2)))

    iv = b1.involution
    involution = float(np.max(np.abs(Fv @ iv - b2.involution @ Fv)))

    metric = float(np.max(np.abs(b1.theta_block
                                 - Fv.T @ b2.theta_block @ Fv)))

    out_order = F.flat[0].space.order - 1
    if out_order < 0:
        raise ValueError("connection intertwining needs F jets of order >= 1")

    def t(g: jets.Jet) -> jets.Jet:
        return jets.truncate(g, out_order)

    worst = 0.0
    for k in range(n):
        W1 = _full_connection(b1, k)
        W2 = _full_connection(b2, k)
        for c, a in np.ndindex(2 * n, 2 * n):
            val = jets.derivative(F[c, a], k)
            for m in range(2 * n):
                val = val + t(W2[c, m]) * t(F[m, a]) - t(F[c, m]) * t(W1[m, a])
            worst = max(worst, abs(val.value))
    return {"maps_phi": maps_phi, "intertwines_involution": involution,
            "preserves_metric": metric, "intertwines_connections": worst}
