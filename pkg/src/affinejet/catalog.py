"""Built-in immersion examples with closed-form expected data.

Each entry couples an ImmersionSpec with hand-derived evaluators for the
induced quantities, so the whole pipeline can be checked against exact
formulas. Evaluator keys name InducedData / CoherentBundleData fields;
every evaluator takes a chart point and returns the value array in the
module's index conventions (gamma[k, i, j], shape[k, i], phi_minus[b, i],
omega[k, b, a]).

The two centroaffine entries use the transversal -f. With the
decomposition convention d_i d_j f = Gamma^k_{ij} d_k f + h_{ij} xi that
makes the denominators in h negative on the chosen domains (for the
paraboloid h = 2 delta_ij / (|x|^2 - 1)); the evaluators state the
signs the decomposition actually produces. Domains are boxes inscribed
in the open disks on which the immersions stay nondegenerate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .bundle import induced_bundle
from .immersion import ImmersionSpec, decompose

Evaluator = Callable[[np.ndarray], np.ndarray]

TWO_PI = 6.283185307179586


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    spec: ImmersionSpec
    expected: Mapping[str, Evaluator]
    notes: str


def _graph_entry(name: str, n: int, potential: str, hessian: Evaluator,
                 gradient: Evaluator, notes: str) -> CatalogEntry:
    coords = [f"x{i + 1}" for i in range(n)]
    spec = ImmersionSpec.from_strings(
        n, coords + [potential], ["0"] * n + ["1"], [[-1, 1]] * n, name)

    def conormal(x):
        return np.append(-gradient(x), 1.0)

    zero3 = lambda x: np.zeros((n, n, n))
    return CatalogEntry(
        name=name, spec=spec,
        expected={
            "h": hessian,
            "gamma": zero3,
            "shape": lambda x: np.zeros((n, n)),
            "tau": lambda x: np.zeros(n),
            "conormal": conormal,
            "phi_minus": lambda x: hessian(x).T,
            "omega_plus": zero3,
            "omega_minus": zero3,
        },
        notes=notes)


def _centroaffine_entry(name: str, potential: str, denominator: Callable,
                        hdiag: Callable, nu_head: Callable, domain,
                        notes: str) -> CatalogEntry:
    # immersion (x, psi(x)) with transversal -f; h = Hess psi / (x.grad psi - psi)
    spec = ImmersionSpec.from_strings(
        2, ["x1", "x2", potential],
        ["-x1", "-x2", f"-({potential})"], domain, name)

    def h(x):
        return np.diag(hdiag(x)) / denominator(x)

    def gamma(x):
        hv = h(x)
        return np.einsum("ij,k->kij", hv, np.asarray(x, dtype=float))

    def conormal(x):
        return np.append(nu_head(x), 1.0) / denominator(x)

    def omega_plus(x):
        # omega+[k, b, a] = gamma[b, k, a]
        return gamma(x).transpose(1, 0, 2)

    def omega_minus(x):
        # omega-[k, b, a] = -gamma[a, k, b]
        return -gamma(x).transpose(2, 0, 1)

    return CatalogEntry(
        name=name, spec=spec,
        expected={
            "h": h,
            "gamma": gamma,
            "shape": lambda x: np.eye(2),
            "tau": lambda x: np.zeros(2),
            "conormal": conormal,
            "phi_minus": lambda x: h(x).T,
            "omega_plus": omega_plus,
            "omega_minus": omega_minus,
        },
        notes=notes)


def _cylinder_entry() -> CatalogEntry:
    spec = ImmersionSpec.from_strings(
        2, ["cos(t)", "sin(t)", "t + x2"], ["-cos(t)", "-sin(t)", "0"],
        [[0.0, TWO_PI], [-1.0, 1.0]], "affine-cylinder")
    h = lambda x: np.diag([1.0, 0.0])
    return CatalogEntry(
        name="affine-cylinder", spec=spec,
        expected={
            "h": h,
            "gamma": lambda x: np.zeros((2, 2, 2)),
            "shape": lambda x: np.array([[1.0, 0.0], [-1.0, 0.0]]),
            "tau": lambda x: np.zeros(2),
            "conormal": lambda x: np.array([-np.cos(x[0]), -np.sin(x[0]), 0.0]),
            "phi_minus": lambda x: h(x),
            "omega_plus": lambda x: np.zeros((2, 2, 2)),
            "omega_minus": lambda x: np.zeros((2, 2, 2)),
        },
        notes="Circle swept along a ruling added to the third coordinate "
              "only: f = (cos t, sin t, t + x2). The metric is degenerate of "
              "rank one everywhere, the induced connection flat, and the "
              "shape operator singular but nonzero.")


def _build() -> dict[str, CatalogEntry]:
    entries: list[CatalogEntry] = []

    flat = ImmersionSpec.from_strings(
        2, ["x1", "x2", "0"], ["0", "0", "1"], [[-1, 1]] * 2, "flat-plane")
    entries.append(CatalogEntry(
        name="flat-plane", spec=flat,
        expected={
            "h": lambda x: np.zeros((2, 2)),
            "gamma": lambda x: np.zeros((2, 2, 2)),
            "shape": lambda x: np.zeros((2, 2)),
            "tau": lambda x: np.zeros(2),
            "conormal": lambda x: np.array([0.0, 0.0, 1.0]),
            "phi_minus": lambda x: np.zeros((2, 2)),
            "omega_plus": lambda x: np.zeros((2, 2, 2)),
            "omega_minus": lambda x: np.zeros((2, 2, 2)),
        },
        notes="Everything vanishes; the bundle map is identically zero."))

    entries.append(_graph_entry(
        "graph-quadratic", 2, "(x1^2 + x2^2)/2",
        hessian=lambda x: np.eye(2),
        gradient=lambda x: np.asarray(x, dtype=float),
        notes="Graph of the round paraboloid potential: h is the identity, "
              "everything else flat."))

    entries.append(_graph_entry(
        "graph-cubic", 2, "(x1^3 + x2^3)/6",
        hessian=lambda x: np.diag(np.asarray(x, dtype=float)),
        gradient=lambda x: np.asarray(x, dtype=float) ** 2 / 2.0,
        notes="Graph of a separable cubic: h = diag(x1, x2) changes rank "
              "across the axes while the connection stays flat."))

    entries.append(_graph_entry(
        "graph-cubic-3d", 3, "(x1^3 + x2^3 + x3^3)/6",
        hessian=lambda x: np.diag(np.asarray(x, dtype=float)),
        gradient=lambda x: np.asarray(x, dtype=float) ** 2 / 2.0,
        notes="Three-dimensional separable cubic graph; h = diag(x1, x2, x3) "
              "has full rank away from the coordinate hyperplanes."))

    entries.append(_centroaffine_entry(
        "centroaffine-paraboloid", "x1^2 + x2^2 + 1",
        denominator=lambda x: float(x[0] ** 2 + x[1] ** 2 - 1.0),
        hdiag=lambda x: np.array([2.0, 2.0]),
        nu_head=lambda x: np.array([2.0 * x[0], 2.0 * x[1]]),
        domain=[[-0.6, 0.6]] * 2,
        notes="Centroaffine paraboloid with transversal -f on a box inside "
              "the unit disk: h = 2 delta_ij / (|x|^2 - 1) (negative "
              "definite here), Gamma^k_ij = h_ij x_k, shape = id."))

    entries.append(_centroaffine_entry(
        "centroaffine-cubic", "x1^3 + x2^3 + 1",
        denominator=lambda x: float(2.0 * (x[0] ** 3 + x[1] ** 3) - 1.0),
        hdiag=lambda x: 6.0 * np.asarray(x, dtype=float),
        nu_head=lambda x: np.array([-3.0 * x[0] ** 2, -3.0 * x[1] ** 2]),
        domain=[[-0.21, 0.21]] * 2,
        notes="Centroaffine cubic with transversal -f on a box where the "
              "denominator 2(x1^3 + x2^3) - 1 stays below -0.4. A common "
              "hand frame for the dual side scales our frame by that "
              "denominator (beta^i = gamma alpha_i); coefficients stated "
              "against the alpha frame convert to omega_minus[k, b, a] = "
              "-6 x_k x_a delta_kb / gamma, which is what the evaluator "
              "returns."))

    entries.append(_cylinder_entry())
    return {e.name: e for e in entries}


_ENTRIES = _build()


def catalog_names() -> tuple[str, ...]:
    return tuple(_ENTRIES)


def catalog_get(name: str) -> CatalogEntry:
    try:
        return _ENTRIES[name]
    except KeyError:
        known = ", ".join(_ENTRIES)
        raise KeyError(f"unknown example {name!r}; choose one of {known}") \
            from None


def expected_residuals(entry: CatalogEntry, p) -> dict[str, float]:
    """Max-abs gap between the computed pipeline and every closed-form
    evaluator the entry carries, at one point."""
    d = decompose(entry.spec, p, order=1)
    b = induced_bundle(d)
    computed = {
        "h": d.h_values(),
        "gamma": d.gamma_values(),
        "shape": d.shape_values(),
        "tau": d.tau_values(),
        "conormal": d.conormal_values(),
        "phi_minus": np.array([[j.value for j in row] for row in b.phi_minus]),
        "omega_plus": np.array([[[j.value for j in r] for r in s]
                                for s in b.omega_plus]),
        "omega_minus": np.array([[[j.value for j in r] for r in s]
                                 for s in b.omega_minus]),
    }
    x = np.asarray(p, dtype=float)
    out = {}
    for key, fn in entry.expected.items():
        out[key] = float(np.max(np.abs(computed[key] - np.asarray(fn(x)))))
    return out
