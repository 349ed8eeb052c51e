"""Pure-numpy jet product kernel, the fallback when the extension is absent."""

from __future__ import annotations

import numpy as np


def convolve(a: np.ndarray, b: np.ndarray, ti: np.ndarray, tj: np.ndarray,
             to: np.ndarray, size: int) -> np.ndarray:
    """Accumulate out[to[t]] += a[ti[t]] * b[tj[t]] over the sparse table."""
    return np.bincount(to, weights=a[ti] * b[tj], minlength=size)
