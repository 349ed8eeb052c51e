"""Independent numerical oracles used by the test suite.

Everything here deliberately avoids the jet pipeline: derivatives come
from central finite differences (with one Richardson step), divergences
from the Bregman formula, solutions from plain float algebra. Tests
compare pipeline output against these.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np


def central_diff(fn: Callable[[np.ndarray], float], x: Sequence[float],
                 alpha: Sequence[int], h: float = 1e-2,
                 richardson: bool = True) -> float:
    """Mixed partial d^alpha fn at x by nested central differences.

    One Richardson step (h and h/2) removes the O(h^2) term, leaving
    O(h^4) truncation error.
    """
    x = np.asarray(x, dtype=float)

    def nested(step: float) -> float:
        def diff(g, i):
            def out(y):
                e = np.zeros_like(y)
                e[i] = step
                return (g(y + e) - g(y - e)) / (2.0 * step)
            return out

        g = fn
        for i, k in enumerate(alpha):
            for _ in range(k):
                g = diff(g, i)
        return g(x)

    if not richardson:
        return nested(h)
    coarse, fine = nested(h), nested(h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def taylor_coefficient(fn, x, alpha, **kw) -> float:
    """Taylor coefficient (not derivative): central_diff / alpha!."""
    fact = math.prod(math.factorial(k) for k in alpha)
    return central_diff(fn, x, alpha, **kw) / fact


def all_alphas(d: int, max_deg: int):
    for deg in range(max_deg + 1):
        for a in itertools.product(range(deg + 1), repeat=d):
            if sum(a) == deg:
                yield a


def bregman(phi: Callable[[np.ndarray], float],
            grad_phi: Callable[[np.ndarray], np.ndarray],
            p: Sequence[float], q: Sequence[float]) -> float:
    """Bregman divergence of the potential phi."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return phi(p) - phi(q) - float(np.dot(grad_phi(q), p - q))
