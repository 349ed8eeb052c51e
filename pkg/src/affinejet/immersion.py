"""Hypersurface immersions with a transversal field, and their induced data.

Conventions. f maps an open box in R^n into R^(n+1); xi is a transversal
vector field along f, so the frame (f_* d_1, ..., f_* d_n, xi) spans the
ambient space at every point. Ambient second derivatives split as

    d_i d_j f = Gamma^k_{ij} f_* d_k + h_{ij} xi
    d_i xi    = -S^k_i f_* d_k + tau_i xi

defining the induced connection Gamma, the (possibly degenerate) second
fundamental form h, the shape operator S, and the transversal connection
form tau. The conormal nu is the ambient covector with <nu, f_* d_i> = 0
and <nu, xi> = 1. The field xi is called equiaffine when tau vanishes.

Everything is computed by solving the frame system over the jet ring, so
each output carries its own exact derivatives: output order K consumes f
at order K+2 and xi at order K+1, hence K <= 2 under the jet order cap.
There is no finite differencing anywhere downstream of this module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from affinejet import expr as ex
from affinejet import jets
from affinejet.jets import (EvaluationError, Jet, JetSpace, derivative,
                            jet_space, linear_solve, truncate, variable)

MAX_DECOMPOSE_ORDER = jets.MAX_ORDER - 2

EQUIAFFINE_TOLERANCE = 1e-8


class SpecError(ValueError):
    """Malformed immersion data (wrong arity, bad domain, unknown names)."""


class DomainExit(EvaluationError):
    """A point left the domain box the immersion is declared on."""


@dataclass(frozen=True)
class ImmersionSpec:
    """An immersion f: box -> R^(n+1) with transversal field xi, as
    expression trees over x1..xn (t aliases x1)."""

    n: int
    f: tuple[ex.Expr, ...]
    xi: tuple[ex.Expr, ...]
    domain: tuple[tuple[float, float], ...]
    label: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise SpecError("dimension must be at least 1")
        if len(self.f) != self.n + 1:
            raise SpecError(f"f needs {self.n + 1} components, "
                            f"got {len(self.f)}")
        if len(self.xi) != self.n + 1:
            raise SpecError(f"xi needs {self.n + 1} components, "
                            f"got {len(self.xi)}")
        if len(self.domain) != self.n:
            raise SpecError(f"domain needs {self.n} intervals, "
                            f"got {len(self.domain)}")
        for lo, hi in self.domain:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise SpecError(f"bad domain interval [{lo}, {hi}]")
        allowed = {f"x{i + 1}" for i in range(self.n)} | {"t"}
        for component in itertools.chain(self.f, self.xi):
            unknown = ex.free_variables(component) - allowed
            if unknown:
                raise SpecError(
                    f"unknown variable {sorted(unknown)[0]!r} "
                    f"(dimension is {self.n})")

    @classmethod
    def from_strings(cls, n: int, f: Sequence[str], xi: Sequence[str],
                     domain: Sequence[Sequence[float]],
                     label: str = "") -> "ImmersionSpec":
        return cls(
            n=n,
            f=tuple(ex.parse(s) for s in f),
            xi=tuple(ex.parse(s) for s in xi),
            domain=tuple((float(lo), float(hi)) for lo, hi in domain),
            label=label,
        )


def variables_env(n: int, space: JetSpace, p: Sequence[float]) -> dict[str, Jet]:
    env = {f"x{i + 1}": variable(space, i, float(p[i])) for i in range(n)}
    env["t"] = env["x1"]
    return env


def _components(exprs: Sequence[ex.Expr], env: dict[str, Jet]) -> np.ndarray:
    out = np.empty(len(exprs), dtype=object)
    for a, e in enumerate(exprs):
        j = ex.evaluate(e, env)
        if not np.all(np.isfinite(j.c)):
            raise EvaluationError("expression produced non-finite "
                                  "coefficients")
        out[a] = j
    return out


def map_jets(spec: ImmersionSpec, p: Sequence[float], order: int) -> np.ndarray:
    """Jets of the n+1 components of f at p."""
    env = variables_env(spec.n, jet_space(spec.n, order), p)
    return _components(spec.f, env)


def transversal_jets(spec: ImmersionSpec, p: Sequence[float],
                     order: int) -> np.ndarray:
    env = variables_env(spec.n, jet_space(spec.n, order), p)
    return _components(spec.xi, env)


def in_domain(spec: ImmersionSpec, p: Sequence[float]) -> bool:
    return all(lo <= x <= hi for x, (lo, hi) in zip(p, spec.domain))


def grid_points(spec: ImmersionSpec, per_axis: int = 7,
                inset_frac: float = 1e-3) -> np.ndarray:
    """Uniform lattice over the domain box, endpoints pulled inward by
    inset_frac of each axis width (keeps off boundary singularities)."""
    axes = [np.linspace(lo + inset_frac * (hi - lo),
                        hi - inset_frac * (hi - lo), per_axis)
            for lo, hi in spec.domain]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass
class InducedData:
    """Induced geometric data at one point, every entry a jet of the
    stated order. Index conventions: gamma[k, i, j] = Gamma^k_{ij},
    h[i, j], shape[k, i] = S^k_i, tau[i], conormal[a], frame[a, c] with
    columns c < n the tangent vectors f_* d_c and column n the field xi
    (rows are ambient components)."""

    n: int
    order: int
    point: tuple[float, ...]
    gamma: np.ndarray
    h: np.ndarray
    shape: np.ndarray
    tau: np.ndarray
    conormal: np.ndarray
    frame: np.ndarray
    f_jets: np.ndarray
    xi_jets: np.ndarray

    def gamma_values(self) -> np.ndarray:
        return _values(self.gamma)

    def h_values(self) -> np.ndarray:
        return _values(self.h)

    def shape_values(self) -> np.ndarray:
        return _values(self.shape)

    def tau_values(self) -> np.ndarray:
        return _values(self.tau)

    def conormal_values(self) -> np.ndarray:
        return _values(self.conormal)


def _values(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=float)
    for idx in np.ndindex(a.shape):
        out[idx] = a[idx].value
    return out


def decompose(spec: ImmersionSpec, p: Sequence[float],
              order: int = 0) -> InducedData:
    """Split ambient second derivatives in the moving frame.

    Solves the (n+1)x(n+1) frame system over the jet ring once (one
    elimination, all right-hand sides), so Gamma, h, S, tau, nu emerge
    as jets of the requested order.
    """
    if not 0 <= order <= MAX_DECOMPOSE_ORDER:
        raise ValueError(f"decompose order must lie in "
                         f"[0, {MAX_DECOMPOSE_ORDER}]")
    if not in_domain(spec, p):
        raise DomainExit(f"point {tuple(p)} outside the domain box")
    n = spec.n
    f_jets = map_jets(spec, p, order + 2)
    xi_jets = transversal_jets(spec, p, order + 1)

    # frame columns at order+1: tangent vectors, then xi
    frame_hi = np.empty((n + 1, n + 1), dtype=object)
    for a in range(n + 1):
        for i in range(n):
            frame_hi[a, i] = derivative(f_jets[a], i)
        frame_hi[a, n] = xi_jets[a]
    frame = np.empty((n + 1, n + 1), dtype=object)
    for idx in np.ndindex(frame.shape):
        frame[idx] = truncate(frame_hi[idx], order)

    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    cols = len(pairs) + n
    rhs = np.empty((n + 1, cols), dtype=object)
    for c, (i, j) in enumerate(pairs):
        for a in range(n + 1):
            rhs[a, c] = derivative(frame_hi[a, i], j)
    for i in range(n):
        for a in range(n + 1):
            rhs[a, len(pairs) + i] = derivative(xi_jets[a], i)

    sol = linear_solve(frame, rhs)

    gamma = np.empty((n, n, n), dtype=object)
    h = np.empty((n, n), dtype=object)
    for c, (i, j) in enumerate(pairs):
        for k in range(n):
            gamma[k, i, j] = sol[k, c]
            gamma[k, j, i] = sol[k, c]
        h[i, j] = sol[n, c]
        h[j, i] = sol[n, c]
    shape = np.empty((n, n), dtype=object)
    tau = np.empty(n, dtype=object)
    for i in range(n):
        for k in range(n):
            shape[k, i] = -sol[k, len(pairs) + i]
        tau[i] = sol[n, len(pairs) + i]

    unit = np.empty((n + 1, 1), dtype=object)
    space = frame[0, 0].space
    for a in range(n + 1):
        unit[a, 0] = jets.constant(space, 1.0 if a == n else 0.0)
    conormal = linear_solve(frame.T, unit)[:, 0]

    return InducedData(n=n, order=order, point=tuple(float(x) for x in p),
                       gamma=gamma, h=h, shape=shape, tau=tau,
                       conormal=conormal, frame=frame, f_jets=f_jets,
                       xi_jets=xi_jets)


def reconstruction_residual(d: InducedData) -> float:
    """Coefficientwise defect of d_i d_j f - Gamma^k_{ij} f_* d_k - h_{ij} xi."""
    n = d.n
    worst = 0.0
    for i in range(n):
        for j in range(n):
            for a in range(n + 1):
                lhs = derivative(derivative(d.f_jets[a], i), j)
                lhs = truncate(lhs, d.order)
                acc = lhs - d.h[i, j] * d.frame[a, n]
                for k in range(n):
                    acc = acc - d.gamma[k, i, j] * d.frame[a, k]
                worst = max(worst, float(np.max(np.abs(acc.c))))
    return worst


def equiaffine_residual(spec: ImmersionSpec, p: Sequence[float]) -> float:
    """max |tau_i| at p; zero exactly when xi is equiaffine there."""
    return float(np.max(np.abs(decompose(spec, p, 0).tau_values())))


def h_rank(d: InducedData, threshold: float = 1e-8) -> int:
    """Singular-value rank of the value part of h."""
    sv = np.linalg.svd(d.h_values(), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > threshold * sv[0]))
