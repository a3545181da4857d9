"""Sign-projection embedding operators.

Three operator families map vectors in R^n to sign codes in {+1, -1}^k:

* ``GaussianOperator``: a dense i.i.d. Gaussian matrix, the classical
  baseline, O(kn) per embedding;
* ``CirculantOperator``: sgn(R C_h diag(r) x), where every row of the
  projection is a modulated cyclic shift of one generator vector h and R
  keeps k of the n rows; O(n log n) per embedding;
* ``RandomizedOperator``: sgn(R C_h diag(r) H diag(b) x), which flattens
  spiky inputs with a random sign flip and a Walsh-Hadamard transform
  before the circulant stage; inputs are zero-padded to the next power of
  two, which leaves inner products (and hence angles) unchanged.

Operators are frozen after sampling. Every code is a pure function of
(kind, n, k, seed, input), with sgn(0) fixed to +1 so ties cannot
introduce nondeterminism.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from .errors import ParseError
from .rng import Rng
from .transforms import _correlate, _fwht_inplace, hadamard_matrix, shift

__all__ = [
    "GaussianOperator",
    "CirculantOperator",
    "RandomizedOperator",
    "Operator",
    "sample_gaussian_operator",
    "sample_circulant_operator",
    "sample_randomized_operator",
    "embed",
    "embed_points",
    "materialize_operator",
    "serialize_operator",
    "deserialize_operator",
]

_U64 = (1 << 64) - 1
_MAGIC = b"BEOP1"
_RECORD_LEN = 30  # 5 magic + 1 kind + 3 * 8 little-endian u64
_KIND_GAUSSIAN, _KIND_CIRCULANT, _KIND_RANDOMIZED = 0, 1, 2


@dataclass(frozen=True, eq=False)
class GaussianOperator:
    G: np.ndarray  # (k, n)
    seed: int

    def __post_init__(self):
        if self.G.ndim != 2 or 0 in self.G.shape:
            raise ValueError("G must be a nonempty k x n matrix")

    @property
    def k(self) -> int:
        return self.G.shape[0]

    @property
    def n(self) -> int:
        return self.G.shape[1]

    @property
    def n_in(self) -> int:
        return self.G.shape[1]


@dataclass(frozen=True, eq=False)
class CirculantOperator:
    h: np.ndarray
    r: np.ndarray
    S: np.ndarray  # k distinct row indices, order-significant
    seed: int
    r_dist: str = "gaussian"

    def __post_init__(self):
        if self.h.ndim != 1 or self.h.shape != self.r.shape:
            raise ValueError("h and r must be 1-D of equal length")
        if self.S.ndim != 1 or not 1 <= self.S.size <= self.h.size:
            raise ValueError("need 1 <= k <= n selected rows")

    @property
    def n(self) -> int:
        return self.h.size

    @property
    def k(self) -> int:
        return self.S.size

    @property
    def n_in(self) -> int:
        return self.h.size

    @cached_property
    def _fh(self) -> np.ndarray:
        # cached spectrum of the generator: one forward and one inverse
        # transform per embedding instead of two forward plus one inverse
        return np.fft.rfft(self.h)


@dataclass(frozen=True, eq=False)
class RandomizedOperator:
    inner: CirculantOperator  # lives at the padded dimension
    b: np.ndarray  # (n_pad,) signs
    n_orig: int
    seed: int

    def __post_init__(self):
        if self.b.shape != (self.inner.n,):
            raise ValueError("b must match the padded dimension")
        if self.inner.n != _next_pow2(self.n_orig):
            raise ValueError("inner operator must live at the padded power-of-2 dimension")

    @property
    def n_pad(self) -> int:
        return self.inner.n

    @property
    def k(self) -> int:
        return self.inner.k

    @property
    def n_in(self) -> int:
        return self.n_orig

    @cached_property
    def _r_scaled(self) -> np.ndarray:
        # diag(r) H equals diag(r / sqrt(n)) applied after the unscaled
        # butterfly; folding the unitary normalization into r saves one
        # full pass over the vector per embedding
        return self.inner.r / math.sqrt(self.n_pad)


Operator = Union[GaussianOperator, CirculantOperator, RandomizedOperator]


def _next_pow2(n: int) -> int:
    return 1 << max(n - 1, 0).bit_length()


def sample_gaussian_operator(n: int, k: int, seed: int) -> GaussianOperator:
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    seed = int(seed) & _U64
    g = Rng(seed).stream("gaussian:G").normals(k * n)
    # draw order is row-major: entry (i, j) is draw i*n + j
    return GaussianOperator(G=g.reshape(k, n), seed=seed)


def _sample_r(rng: Rng, n: int, r_dist: str) -> np.ndarray:
    if r_dist == "gaussian":
        return rng.stream("circulant:r").normals(n)
    if r_dist == "rademacher":
        return rng.stream("circulant:r").rademacher(n)
    raise ValueError(f"unknown r_dist {r_dist!r}; expected 'gaussian' or 'rademacher'")


def sample_circulant_operator(n: int, k: int, seed: int, r_dist: str = "gaussian") -> CirculantOperator:
    if not 1 <= k <= n:
        raise ValueError(f"circulant operator requires 1 <= k <= n, got k={k}, n={n}")
    seed = int(seed) & _U64
    rng = Rng(seed)
    h = rng.stream("circulant:h").normals(n)
    r = _sample_r(rng, n, r_dist)
    S = rng.stream("circulant:S").index_subset(n, k)
    return CirculantOperator(h=h, r=r, S=S, seed=seed, r_dist=r_dist)


def sample_randomized_operator(n: int, k: int, seed: int, r_dist: str = "gaussian") -> RandomizedOperator:
    if n < 1:
        raise ValueError(f"need n >= 1, got n={n}")
    seed = int(seed) & _U64
    n_pad = _next_pow2(n)
    if not 1 <= k <= n_pad:
        raise ValueError(f"randomized operator requires 1 <= k <= n_pad={n_pad}, got k={k}")
    inner = sample_circulant_operator(n_pad, k, seed, r_dist=r_dist)
    b = Rng(seed).stream("randomized:b").rademacher(n_pad)
    return RandomizedOperator(inner=inner, b=b, n_orig=n, seed=seed)


def _pad(v: np.ndarray, n_pad: int) -> np.ndarray:
    if v.size == n_pad:
        return v
    out = np.zeros(n_pad)
    out[: v.size] = v
    return out


def _sign(t: np.ndarray) -> np.ndarray:
    # sgn(0) := +1
    return np.where(t >= 0.0, 1, -1).astype(np.int8)


def _project(op: Operator, v: np.ndarray) -> np.ndarray:
    if isinstance(op, GaussianOperator):
        return op.G @ v
    if isinstance(op, CirculantOperator):
        return _correlate(op._fh, op.r * v)[op.S]
    if isinstance(op, RandomizedOperator):
        # the product below is a fresh temporary we own, so the butterfly
        # may run in place; its unitary 1/sqrt(n) scale lives in _r_scaled
        w = op.b * _pad(v, op.n_pad)
        _fwht_inplace(w)
        w *= op._r_scaled
        return _correlate(op.inner._fh, w)[op.inner.S]
    raise TypeError(f"not an operator: {type(op).__name__}")


def embed(op: Operator, x) -> np.ndarray:
    """Map x to its sign code in {+1, -1}^k (int8)."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size != op.n_in:
        raise ValueError(f"expected a vector of length {op.n_in}, got shape {v.shape}")
    # min/max reductions catch NaN and Inf without allocating a mask
    if not (math.isfinite(float(v.min())) and math.isfinite(float(v.max()))):
        raise ValueError("input contains NaN or Inf")
    return _sign(_project(op, v))


def embed_points(op: Operator, points, threads: int = 1) -> np.ndarray:
    """Embed each row of ``points``; returns an (N, k) int8 code matrix.

    Rows are independent, so work may fan out across threads; output order
    follows input order regardless of the thread count, and each row's code
    is computed by the identical single-vector path either way.
    """
    P = np.asarray(points, dtype=np.float64)
    if P.ndim == 1:
        P = P[None, :]
    if P.ndim != 2:
        raise ValueError("points must be a vector or an N x n matrix")
    N = P.shape[0]
    out = np.empty((N, op.k), dtype=np.int8)
    if threads <= 1 or N == 1:
        for i in range(N):
            out[i] = embed(op, P[i])
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            for i, code in enumerate(ex.map(lambda row: embed(op, row), P)):
                out[i] = code
    return out


def materialize_operator(op: Operator) -> np.ndarray:
    """Dense k x n_in matrix whose sign pattern ``embed`` reproduces.

    Built row by row from explicit shifts and the doubling Hadamard
    construction, deliberately avoiding the FFT and butterfly fast paths.
    Quadratic cost; reference use only.
    """
    if isinstance(op, GaussianOperator):
        return op.G.copy()
    if isinstance(op, CirculantOperator):
        rows = np.stack([shift(op.h, int(i)) for i in op.S])
        return rows * op.r[None, :]
    if isinstance(op, RandomizedOperator):
        inner = op.inner
        rows = np.stack([shift(inner.h, int(i)) for i in inner.S])
        A = (rows * inner.r[None, :]) @ hadamard_matrix(op.n_pad)
        A = A * op.b[None, :]
        return A[:, : op.n_orig]
    raise TypeError(f"not an operator: {type(op).__name__}")


def serialize_operator(op: Operator) -> bytes:
    """30-byte record: magic, kind byte, then n, k, seed as little-endian u64.

    Parameters are regenerated from the seed on load, never stored raw, so
    only operators sampled with the default r distribution serialize.
    """
    if isinstance(op, GaussianOperator):
        kind, n = _KIND_GAUSSIAN, op.n
    elif isinstance(op, CirculantOperator):
        _require_default_r(op)
        kind, n = _KIND_CIRCULANT, op.n
    elif isinstance(op, RandomizedOperator):
        _require_default_r(op.inner)
        kind, n = _KIND_RANDOMIZED, op.n_orig
    else:
        raise TypeError(f"not an operator: {type(op).__name__}")
    return _MAGIC + bytes([kind]) + struct.pack("<QQQ", n, op.k, op.seed & _U64)


def _require_default_r(inner: CirculantOperator) -> None:
    if inner.r_dist != "gaussian":
        raise ValueError(
            "the serialization format has no field for r_dist; "
            "only the default gaussian r is serializable"
        )


def deserialize_operator(data: bytes) -> Operator:
    if len(data) < len(_MAGIC) or bytes(data[:5]) != _MAGIC:
        raise ParseError(f"bad magic {bytes(data[:5])!r}, expected {_MAGIC!r}", 0)
    if len(data) < 6:
        raise ParseError("record truncated before kind byte", 5)
    kind = data[5]
    if kind not in (_KIND_GAUSSIAN, _KIND_CIRCULANT, _KIND_RANDOMIZED):
        raise ParseError(f"unknown operator kind {kind}", 5)
    if len(data) < _RECORD_LEN:
        raise ParseError("record truncated", len(data))
    if len(data) > _RECORD_LEN:
        raise ParseError(f"trailing bytes after {_RECORD_LEN}-byte record", _RECORD_LEN)
    n, k, seed = struct.unpack("<QQQ", data[6:_RECORD_LEN])
    try:
        if kind == _KIND_GAUSSIAN:
            return sample_gaussian_operator(n, k, seed)
        if kind == _KIND_CIRCULANT:
            return sample_circulant_operator(n, k, seed)
        return sample_randomized_operator(n, k, seed)
    except ValueError as e:
        raise ParseError(f"invalid operator parameters n={n}, k={k}: {e}", 6) from e
