"""Exact truncated Taylor jets in several variables.

A jet of order K in d variables represents a smooth germ g by its Taylor
coefficients

    c_alpha = (d^alpha g)(p) / alpha!        for every |alpha| <= K,

stored in a flat float64 array. Coefficients are enumerated in graded
order: total degree 0 first, then degree 1, degree 2, ..., and inside a
degree by ascending lexicographic comparison of the exponent tuples.
For d = 2, K = 2 that is (0,0), (0,1), (1,0), (0,2), (1,1), (2,0). The
graded layout makes the order-L coefficients of an order-K jet a prefix
of the array, so truncation is a slice.

Arithmetic is exact ring arithmetic on the coefficients (the product is
the Cauchy convolution truncated at degree K, with no derivative
multipliers because coefficients carry 1/alpha! already). Elementary
functions are applied by composing the univariate Taylor expansion of
the outer function around the jet's value with the jet's nonconstant
part, evaluated by a Horner recurrence in the jet ring. Derivatives map
an order-K jet to an order K-1 jet; there is no dynamic order
promotion, and the maximum supported order is MAX_ORDER = 4.

Jets are immutable. Two jets can be combined only when they live in the
same JetSpace (same d and K); spaces are interned, so identity checks
suffice.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

try:
    from affinejet._jetcore import convolve as _convolve
    COMPILED_KERNEL = True
except ImportError:
    from affinejet._jetcore_py import convolve as _convolve
    COMPILED_KERNEL = False

MAX_ORDER = 4


class EvaluationError(Exception):
    """Numeric evaluation left the well-defined regime (division by zero,
    negative sqrt argument, non-finite coefficients, domain exit)."""


class FrameDegenerate(EvaluationError):
    """A linear solve over the jet ring met a singular value-part matrix."""


def _monomials(d: int, deg: int) -> Iterator[tuple[int, ...]]:
    if d == 1:
        yield (deg,)
        return
    for first in range(deg + 1):
        for rest in _monomials(d - 1, deg - first):
            yield (first,) + rest


class JetSpace:
    """Coefficient layout and precomputed tables for jets of one (d, K)."""

    __slots__ = ("dim", "order", "alphas", "index", "size", "factorial",
                 "_mul_ti", "_mul_tj", "_mul_to", "_diff_src", "_diff_dst",
                 "_diff_mul")

    def __init__(self, dim: int, order: int):
        if dim < 1:
            raise ValueError("jet dimension must be at least 1")
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must lie in [0, {MAX_ORDER}]")
        self.dim = dim
        self.order = order
        alphas: list[tuple[int, ...]] = []
        for deg in range(order + 1):
            alphas.extend(sorted(_monomials(dim, deg)))
        self.alphas = tuple(alphas)
        self.index = {a: i for i, a in enumerate(alphas)}
        self.size = len(alphas)
        self.factorial = np.array(
            [math.prod(math.factorial(k) for k in a) for a in alphas],
            dtype=float)

        ti, tj, to = [], [], []
        for i, a in enumerate(alphas):
            da = sum(a)
            for j, b in enumerate(alphas):
                if da + sum(b) > order:
                    continue
                ti.append(i)
                tj.append(j)
                to.append(self.index[tuple(x + y for x, y in zip(a, b))])
        self._mul_ti = np.asarray(ti, dtype=np.int32)
        self._mul_tj = np.asarray(tj, dtype=np.int32)
        self._mul_to = np.asarray(to, dtype=np.int32)

        # Tables for d/dx_i: order-K coefficients feed the order K-1 layout.
        self._diff_src, self._diff_dst, self._diff_mul = [], [], []
        if order >= 1:
            lower = jet_space(dim, order - 1)
            for i in range(dim):
                src, dst, mul = [], [], []
                for a in alphas:
                    if a[i] == 0:
                        continue
                    b = tuple(x - (1 if k == i else 0) for k, x in enumerate(a))
                    src.append(self.index[a])
                    dst.append(lower.index[b])
                    mul.append(float(a[i]))
                self._diff_src.append(np.asarray(src, dtype=np.int32))
                self._diff_dst.append(np.asarray(dst, dtype=np.int32))
                self._diff_mul.append(np.asarray(mul, dtype=float))

    def __repr__(self) -> str:
        return f"JetSpace(dim={self.dim}, order={self.order})"


@lru_cache(maxsize=None)
def jet_space(dim: int, order: int) -> JetSpace:
    return JetSpace(dim, order)


class Jet:
    """Immutable element of a JetSpace with overloaded ring operators."""

    __slots__ = ("space", "c")

    # numpy scalars must defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        c = np.asarray(coeffs, dtype=float)
        if c.shape != (space.size,):
            raise ValueError("coefficient array does not match the space")
        c = c.copy()
        c.flags.writeable = False
        self.c = c

    @property
    def value(self) -> float:
        return float(self.c[0])

    def coeff(self, alpha: Sequence[int]) -> float:
        return float(self.c[self.space.index[tuple(alpha)]])

    def _coerce(self, other) -> "Jet | None":
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise ValueError("jets from different spaces cannot be mixed")
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return constant(self.space, float(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.c + o.c)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.c - o.c)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, o.c - self.c)

    def __neg__(self):
        return Jet(self.space, -self.c)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.space, self.c * float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        s = self.space
        return Jet(s, _convolve(self.c, o.c, s._mul_ti, s._mul_tj,
                                s._mul_to, s.size))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            if other == 0:
                raise EvaluationError("division by zero")
            return Jet(self.space, self.c / float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * _reciprocal(o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * _reciprocal(self)

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        return powi(self, int(k))

    def __repr__(self) -> str:
        return f"Jet({self.space!r}, value={self.value:g})"


def constant(space: JetSpace, value: float) -> Jet:
    c = np.zeros(space.size)
    c[0] = value
    return Jet(space, c)


def variable(space: JetSpace, i: int, value: float) -> Jet:
    """The coordinate germ x_i |-> value + (x_i - value)."""
    if not 0 <= i < space.dim:
        raise ValueError("variable index out of range")
    c = np.zeros(space.size)
    c[0] = value
    if space.order >= 1:
        e_i = tuple(1 if k == i else 0 for k in range(space.dim))
        c[space.index[e_i]] = 1.0
    return Jet(space, c)


def truncate(a: Jet, order: int) -> Jet:
    """Drop coefficients above the given total degree (graded prefix)."""
    if order > a.space.order:
        raise ValueError("cannot truncate upward")
    target = jet_space(a.space.dim, order)
    return Jet(target, a.c[:target.size])


def derivative(a: Jet, i: int) -> Jet:
    """d/dx_i, exact; the result is one order lower."""
    s = a.space
    if s.order == 0:
        raise ValueError("order-0 jets cannot be differentiated")
    target = jet_space(s.dim, s.order - 1)
    out = np.zeros(target.size)
    out[s._diff_dst[i]] = a.c[s._diff_src[i]] * s._diff_mul[i]
    return Jet(target, out)


def _compose(series: Sequence[float], a: Jet) -> Jet:
    """Horner evaluation of sum_m series[m] * (a - a0)^m in the jet ring."""
    u = Jet(a.space, np.concatenate(([0.0], a.c[1:])))
    out = constant(a.space, series[a.space.order])
    for m in range(a.space.order - 1, -1, -1):
        out = out * u + series[m]
    return out


def _reciprocal(b: Jet) -> Jet:
    b0 = b.value
    if b0 == 0.0 or not math.isfinite(b0):
        raise EvaluationError("division by a jet with zero value part")
    series = [(-1.0) ** m / b0 ** (m + 1) for m in range(b.space.order + 1)]
    return _compose(series, b)


def exp(a: Jet) -> Jet:
    e0 = math.exp(a.value)
    series = [e0 / math.factorial(m) for m in range(a.space.order + 1)]
    return _compose(series, a)


def sin(a: Jet) -> Jet:
    a0 = a.value
    cycle = [math.sin(a0), math.cos(a0), -math.sin(a0), -math.cos(a0)]
    series = [cycle[m % 4] / math.factorial(m)
              for m in range(a.space.order + 1)]
    return _compose(series, a)


def cos(a: Jet) -> Jet:
    a0 = a.value
    cycle = [math.cos(a0), -math.sin(a0), -math.cos(a0), math.sin(a0)]
    series = [cycle[m % 4] / math.factorial(m)
              for m in range(a.space.order + 1)]
    return _compose(series, a)


def sqrt(a: Jet) -> Jet:
    a0 = a.value
    if a0 <= 0.0:
        raise EvaluationError("sqrt of a jet with nonpositive value part")
    s = math.sqrt(a0)
    series, b = [], 1.0
    for m in range(a.space.order + 1):
        series.append(s * b / a0 ** m)
        b *= (0.5 - m) / (m + 1)
    return _compose(series, a)


def powi(a: Jet, k: int) -> Jet:
    """Integer power by repeated squaring; negative k via the reciprocal."""
    if k < 0:
        return _reciprocal(powi(a, -k))
    out = constant(a.space, 1.0)
    base = a
    while k:
        if k & 1:
            out = out * base
        base = base * base if k > 1 else base
        k >>= 1
    return out


def linear_solve(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve A X = B over the jet ring by Gaussian elimination.

    A is an (m, m) object array of jets, B an (m, r) object array in the
    same space. Pivoting is by largest absolute value part; a pivot below
    1e-12 * max(1, max |A| value parts) raises FrameDegenerate.
    """
    A = np.array(A, dtype=object)
    B = np.array(B, dtype=object)
    m = A.shape[0]
    if A.shape != (m, m) or B.shape[0] != m:
        raise ValueError("incompatible shapes in jet linear solve")
    r = B.shape[1]
    scale = max(1.0, max(abs(A[i, j].value) for i in range(m)
                         for j in range(m)))
    tol = 1e-12 * scale
    for col in range(m):
        piv = max(range(col, m), key=lambda row: abs(A[row, col].value))
        if abs(A[piv, col].value) <= tol:
            raise FrameDegenerate(
                f"singular value-part matrix (pivot {A[piv, col].value:.3e})")
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            B[[col, piv]] = B[[piv, col]]
        for row in range(col + 1, m):
            f = A[row, col] / A[col, col]
            for j in range(col + 1, m):
                A[row, j] = A[row, j] - f * A[col, j]
            for j in range(r):
                B[row, j] = B[row, j] - f * B[col, j]
    X = np.empty((m, r), dtype=object)
    for col in range(m - 1, -1, -1):
        for j in range(r):
            acc = B[col, j]
            for k in range(col + 1, m):
                acc = acc - A[col, k] * X[k, j]
            X[col, j] = acc / A[col, col]
    return X
