"""Cyclic shifts, the Walsh-Hadamard transform, and circulant products.

Vectors are 1-D float64 numpy arrays. Every public operation is pure;
inputs are never modified in place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

__all__ = [
    "IndexSet",
    "shift",
    "fwht",
    "circulant_apply",
    "naive_circulant_apply",
    "restrict",
    "hadamard_matrix",
]


@dataclass(frozen=True, eq=False)
class IndexSet:
    """k distinct indices into a length-n vector; order is significant."""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", idx)
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("indices must be a nonempty 1-D sequence")
        if self.n < 1 or idx.size > self.n:
            raise ValueError(f"need 1 <= k <= n, got k={idx.size}, n={self.n}")
        if int(idx.min()) < 0 or int(idx.max()) >= self.n:
            raise ValueError(f"index out of range for dimension {self.n}")
        if np.unique(idx).size != idx.size:
            raise ValueError("indices must be distinct")

    @property
    def k(self) -> int:
        return int(self.indices.size)


def _as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-D vector")
    return v


def shift(x, i: int) -> np.ndarray:
    """Cyclic shift: output[j] = x[(i + j) mod n]."""
    v = _as_vector(x)
    n = v.size
    if not 0 <= i < n:
        raise ValueError(f"shift index {i} outside [0, {n})")
    return np.roll(v, -i)


if _HAVE_NUMBA:

    @njit(cache=True)
    def _fwht_inplace(a):  # pragma: no cover - exercised through fwht
        n = a.shape[0]
        h = 1
        while h < n:
            step = h * 2
            for start in range(0, n, step):
                for j in range(start, start + h):
                    u = a[j]
                    v = a[j + h]
                    a[j] = u + v
                    a[j + h] = u - v
            h = step

else:  # pragma: no cover

    def _fwht_inplace(a):
        n = a.shape[0]
        h = 1
        while h < n:
            blocks = a.reshape(n // (2 * h), 2, h)
            u = blocks[:, 0, :].copy()
            v = blocks[:, 1, :].copy()
            blocks[:, 0, :] = u + v
            blocks[:, 1, :] = u - v
            h *= 2


def fwht(x) -> np.ndarray:
    """Unitary Walsh-Hadamard transform. Length must be a power of 2."""
    v = _as_vector(x)
    n = v.size
    if n & (n - 1):
        raise ValueError(f"length {n} is not a power of 2")
    out = v.copy()
    _fwht_inplace(out)
    out *= 1.0 / math.sqrt(n)
    return out


def circulant_apply(h, x) -> np.ndarray:
    """Multiply by the circulant matrix whose row i is shift(h, i).

    Computed as a circular cross-correlation through the FFT, so the cost is
    O(n log n): output[i] = sum_j h[(i+j) mod n] * x[j].
    """
    hv = _as_vector(h)
    xv = _as_vector(x)
    if hv.size != xv.size:
        raise ValueError(f"length mismatch: h has {hv.size}, x has {xv.size}")
    return _correlate(np.fft.rfft(hv), xv)


def _correlate(fh: np.ndarray, x: np.ndarray) -> np.ndarray:
    # cross-correlation diagonalizes as fh * conj(fx); fh may be precomputed
    n = x.shape[-1]
    return np.fft.irfft(fh * np.fft.rfft(x).conj(), n)


def naive_circulant_apply(h, x) -> np.ndarray:
    """Row-by-row O(n^2) reference for circulant_apply.

    Builds every row literally as a window into [h, h] and multiplies.
    This is the correctness oracle; it never touches the FFT path.
    """
    hv = _as_vector(h)
    xv = _as_vector(x)
    if hv.size != xv.size:
        raise ValueError(f"length mismatch: h has {hv.size}, x has {xv.size}")
    n = hv.size
    hh = np.concatenate([hv, hv])
    rows = np.lib.stride_tricks.sliding_window_view(hh, n)[:n]
    # rows[i] == hh[i : i + n] == shift(h, i) by construction
    return rows @ xv


def restrict(x, S) -> np.ndarray:
    """Select entries of x at the ordered indices of S."""
    v = _as_vector(x)
    if isinstance(S, IndexSet):
        if S.n != v.size:
            raise ValueError(f"index set is for dimension {S.n}, vector has {v.size}")
        idx = S.indices
    else:
        idx = np.asarray(S, dtype=np.int64)
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("expected a nonempty 1-D index sequence")
        if int(idx.min()) < 0 or int(idx.max()) >= v.size:
            raise ValueError(f"index out of range for dimension {v.size}")
    return v[idx]


def hadamard_matrix(n: int) -> np.ndarray:
    """Dense unitary Hadamard matrix by the doubling construction.

    Quadratic memory; meant as a reference object for tests and for
    materializing small operators, not as a compute path.
    """
    if n < 1 or n & (n - 1):
        raise ValueError(f"order {n} is not a power of 2")
    H = np.ones((1, 1))
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    return H / math.sqrt(n)
