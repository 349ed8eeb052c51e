"""Geometric divergence of an immersion and its contrast-function checks.

The divergence of a point pair is the pairing of the conormal at the
second point with the chord from the second point to the first:

    div(p, q) = <nu(q), f(p) - f(q)>.

Its mixed Taylor coefficients on the diagonal recover the induced metric
and the cubic form, which is what the residual helpers certify. For
graph immersions the divergence coincides with the Bregman divergence of
the graph potential.

All two-point jets live in a single 2n-variable space: the first n
variables move p, the last n move q, and the base point is (r, r).
Brackets are written bracket(left, right) with left the p-slot
derivative multi-index and right the q-slot one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import jets, tensors
from .immersion import (DomainExit, ImmersionSpec, decompose, in_domain,
                        map_jets, transversal_jets)

MAX_DIVERGENCE_ORDER = 3


def _values(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape)
    for idx in np.ndindex(a.shape):
        out[idx] = a[idx].value
    return out


def geometric_divergence(spec: ImmersionSpec, p: Sequence[float],
                         q: Sequence[float]) -> float:
    """<nu(q), f(p) - f(q)>. Raises FrameDegenerate when the moving frame
    at q is singular and DomainExit when either point leaves the box."""
    if not in_domain(spec, p):
        raise DomainExit(f"point {tuple(p)} outside the domain box")
    nu = decompose(spec, q, order=0).conormal_values()
    fp = _values(map_jets(spec, p, 0))
    fq = _values(map_jets(spec, q, 0))
    return float(nu @ (fp - fq))


def conormal_jets(spec: ImmersionSpec, r: Sequence[float],
                  order: int) -> np.ndarray:
    """Taylor jets of the conormal field at r up to the given order.

    Only the frame has to be differentiated for this, so the order cap
    is one below the jet-engine maximum rather than the decompose cap.
    """
    if not 0 <= order <= jets.MAX_ORDER - 1:
        raise ValueError(f"conormal order must lie in [0, {jets.MAX_ORDER - 1}]")
    if not in_domain(spec, r):
        raise DomainExit(f"point {tuple(r)} outside the domain box")
    n = spec.n
    f_jets = map_jets(spec, r, order + 1)
    xi_jets = transversal_jets(spec, r, order)
    frame = np.empty((n + 1, n + 1), dtype=object)
    for a in range(n + 1):
        for i in range(n):
            frame[a, i] = jets.derivative(f_jets[a], i)
        frame[a, n] = xi_jets[a]
    space = frame[0, 0].space
    unit = np.empty((n + 1, 1), dtype=object)
    for a in range(n + 1):
        unit[a, 0] = jets.constant(space, 1.0 if a == n else 0.0)
    return jets.linear_solve(frame.T, unit)[:, 0]


@dataclass(frozen=True)
class DivergenceJet:
    """Two-point jet of the divergence at a diagonal base point."""

    n: int
    order: int
    point: tuple[float, ...]
    jet: jets.Jet

    def bracket(self, left: Sequence[int], right: Sequence[int]) -> float:
        """Mixed partial derivative: `left` counts p-slot derivatives per
        coordinate, `right` q-slot ones (Taylor coefficient times the
        factorials)."""
        left, right = tuple(left), tuple(right)
        if len(left) != self.n or len(right) != self.n:
            raise ValueError(f"bracket indices must have length {self.n}")
        alpha = left + right
        fact = math.prod(math.factorial(k) for k in alpha)
        return self.jet.coeff(alpha) * fact


def divergence_jet(spec: ImmersionSpec, r: Sequence[float],
                   order: int = MAX_DIVERGENCE_ORDER) -> DivergenceJet:
    """Jet of the divergence in 2n variables at (r, r).

    The p-slot consumes the immersion jet directly; the q-slot composes
    the Taylor expansions of both f and the conormal field at r with the
    q-displacement variables.
    """
    if not 0 <= order <= MAX_DIVERGENCE_ORDER:
        raise ValueError(f"divergence order must lie in [0, {MAX_DIVERGENCE_ORDER}]")
    n = spec.n
    space2 = jets.jet_space(2 * n, order)

    def slot_env(offset: int) -> dict:
        env = {}
        for i in range(n):
            env[f"x{i + 1}"] = jets.variable(space2, offset + i, float(r[i]))
        env["t"] = env["x1"]
        return env

    from . import expr as ex
    fp = np.empty(n + 1, dtype=object)
    fq = np.empty(n + 1, dtype=object)
    env_p, env_q = slot_env(0), slot_env(n)
    for a in range(n + 1):
        fp[a] = ex.evaluate(spec.f[a], env_p)
        fq[a] = ex.evaluate(spec.f[a], env_q)

    # conormal Taylor coefficients at r, re-expanded in the q variables
    nu_taylor = conormal_jets(spec, r, order)
    qvars = [jets.variable(space2, n + i, 0.0) for i in range(n)]
    nspace = nu_taylor[0].space
    rho = jets.constant(space2, 0.0)
    for a in range(n + 1):
        nu_a = jets.constant(space2, 0.0)
        for alpha, c in zip(nspace.alphas, nu_taylor[a].c):
            if c == 0.0:
                continue
            term = jets.constant(space2, float(c))
            for i, k in enumerate(alpha):
                if k:
                    term = term * jets.powi(qvars[i], k)
            nu_a = nu_a + term
        rho = rho + nu_a * (fp[a] - fq[a])
    return DivergenceJet(n=n, order=order,
                         point=tuple(float(x) for x in r), jet=rho)


def weak_contrast_residuals(spec: ImmersionSpec,
                            r: Sequence[float]) -> dict[str, float]:
    """Five contrast-function residuals of the divergence jet at r.

    diagonal: |div(r, r)|; p/q_slot_gradient: first derivatives in either
    slot; metric_recovery: |bracket(e_i, e_j) + h_ij|; cubic_recovery:
    |bracket(e_i + e_j, e_k) - bracket(e_k, e_i + e_j) - C_ijk| with
    C the covariant derivative of h.
    """
    n = spec.n
    dj = divergence_jet(spec, r, order=MAX_DIVERGENCE_ORDER)
    data = decompose(spec, r, order=1)
    h = data.h_values()
    conn = tensors.ConnectionAtPoint(n, data.gamma)
    cubic = tensors.cov_deriv_02(conn, data.h)  # [i, j, k] = (nabla_i h)_{jk}

    def unit(i: int) -> tuple[int, ...]:
        return tuple(1 if k == i else 0 for k in range(n))

    zero = (0,) * n
    out = {"diagonal": abs(dj.bracket(zero, zero))}
    out["p_slot_gradient"] = max(abs(dj.bracket(unit(i), zero))
                                 for i in range(n))
    out["q_slot_gradient"] = max(abs(dj.bracket(zero, unit(i)))
                                 for i in range(n))
    out["metric_recovery"] = max(
        abs(dj.bracket(unit(i), unit(j)) + h[i, j])
        for i in range(n) for j in range(n))
    worst = 0.0
    for i in range(n):
        for j in range(n):
            pair = tuple(a + b for a, b in zip(unit(i), unit(j)))
            for k in range(n):
                got = dj.bracket(pair, unit(k)) - dj.bracket(unit(k), pair)
                worst = max(worst, abs(got - cubic[i, j, k]))
    out["cubic_recovery"] = worst
    return out
