"""Point-set and report persistence plus synthetic point-set generators.

Binary point sets (PSET1): 5-byte magic ``PSET1``, then n and N as
little-endian unsigned 64-bit integers, then N*n IEEE-754 doubles,
row-major, little-endian. File length is exactly 21 + 8*N*n bytes.

CSV point sets: a ``dim=<n>`` header line, then one comma-separated row per
point with 17 significant digits per value, which round-trips float64.

Reports are JSON documents with sorted keys and ``schema_version`` "1":
top-level keys are schema_version, kind, params, stats, arrays. ``params``
echoes everything needed to reproduce the run.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError
from .geometry import PointSet
from .rng import Rng

__all__ = [
    "ResultDocument",
    "load_pointset",
    "save_pointset",
    "load_pointset_csv",
    "save_pointset_csv",
    "load_codes",
    "save_codes",
    "load_result",
    "save_result",
    "generate_pointset",
]

_MAGIC = b"PSET1"
_HEADER_LEN = 21
_RENORM_TOL = 1e-9  # rows off by more than this get renormalized
_WARN_TOL = 1e-6  # rows off by more than this additionally warn


def _apply_unit_policy(raw: np.ndarray, origin: str) -> np.ndarray:
    """Normalize rows to unit norm, leaving already-unit rows untouched.

    Rows within 1e-9 of unit norm pass through bit-exactly. Deviations up to
    1e-6 are silently renormalized; anything worse renormalizes too but
    draws a warning, since the data was probably not meant to be spherical.
    """
    norms = np.linalg.norm(raw, axis=1)
    off = np.abs(norms - 1.0)
    worst = float(off.max())
    if worst > _WARN_TOL:
        n_bad = int((off > _WARN_TOL).sum())
        warnings.warn(
            f"{origin}: {n_bad} rows deviate from unit norm by up to {worst:.3g}; renormalizing",
            stacklevel=3,
        )
    fix = off > _RENORM_TOL
    if fix.any():
        raw = raw.copy()
        raw[fix] /= norms[fix, None]
    return raw


def load_pointset(path) -> PointSet:
    data = Path(path).read_bytes()
    if len(data) < len(_MAGIC) or data[:5] != _MAGIC:
        raise ParseError(f"bad magic {bytes(data[:5])!r}, expected {_MAGIC!r}", 0)
    if len(data) < _HEADER_LEN:
        raise ParseError("header truncated", len(data))
    n, N = struct.unpack("<QQ", data[5:_HEADER_LEN])
    if N < 1 or n < 2:
        raise ParseError(f"header declares N={N}, n={n}; need N >= 1 and n >= 2", 5)
    expected = _HEADER_LEN + 8 * N * n
    if len(data) != expected:
        raise ParseError(
            f"length mismatch: file has {len(data)} bytes, header implies {expected}",
            min(len(data), expected),
        )
    raw = np.frombuffer(data, dtype="<f8", offset=_HEADER_LEN).reshape(N, n).astype(np.float64)
    finite = np.isfinite(raw)
    if not finite.all():
        flat = int(np.argmax(~finite.ravel()))
        raise ParseError(
            f"non-finite value at row {flat // n}, column {flat % n}",
            _HEADER_LEN + 8 * flat,
        )
    norms = np.linalg.norm(raw, axis=1)
    if (norms == 0.0).any():
        row = int(np.argmax(norms == 0.0))
        raise ParseError(f"row {row} is all zeros", _HEADER_LEN + 8 * row * n)
    return PointSet(_apply_unit_policy(raw, str(path)))


def save_pointset(ps: PointSet, path) -> None:
    payload = np.ascontiguousarray(ps.points, dtype="<f8").tobytes()
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<QQ", ps.n, ps.N))
        f.write(payload)


def save_pointset_csv(ps: PointSet, path) -> None:
    lines = [f"dim={ps.n}"]
    for row in ps.points:
        lines.append(",".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_pointset_csv(path) -> PointSet:
    text = Path(path).read_text()
    lines = text.splitlines()
    offsets = []
    pos = 0
    for ln in lines:
        offsets.append(pos)
        pos += len(ln) + 1
    content = [(off, ln) for off, ln in zip(offsets, lines) if ln.strip()]
    if not content or not content[0][1].startswith("dim="):
        raise ParseError("missing dim=<n> header", 0)
    head_off, head = content[0]
    try:
        n = int(head[4:])
    except ValueError:
        raise ParseError(f"bad dimension field {head[4:]!r}", head_off + 4) from None
    if n < 2:
        raise ParseError(f"dimension must be at least 2, got {n}", head_off + 4)
    rows = []
    for off, ln in content[1:]:
        parts = ln.split(",")
        if len(parts) != n:
            raise ParseError(f"expected {n} fields, got {len(parts)}", off)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError("unparseable float", off) from None
    if not rows:
        raise ParseError("no point rows after header", pos)
    raw = np.array(rows, dtype=np.float64)
    if not np.isfinite(raw).all():
        bad = int(np.argmax(~np.isfinite(raw).ravel())) // n
        raise ParseError(f"non-finite value in row {bad}", content[1 + bad][0])
    norms = np.linalg.norm(raw, axis=1)
    if (norms == 0.0).any():
        row = int(np.argmax(norms == 0.0))
        raise ParseError(f"row {row} is all zeros", content[1 + row][0])
    return PointSet(_apply_unit_policy(raw, str(path)))


def save_codes(codes: np.ndarray, path) -> None:
    """One code per line, entries +1/-1 comma-separated."""
    codes = np.asarray(codes)
    if codes.ndim != 2:
        raise ValueError("codes must be an N x k matrix")
    with open(path, "w") as f:
        for row in codes:
            f.write(",".join("+1" if v > 0 else "-1" for v in row) + "\n")


def load_codes(path) -> np.ndarray:
    text = Path(path).read_text()
    rows = []
    pos = 0
    width = None
    for ln in text.splitlines():
        if ln.strip():
            parts = ln.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ParseError(f"expected {width} fields, got {len(parts)}", pos)
            vals = []
            for p in parts:
                if p not in ("+1", "-1", "1"):
                    raise ParseError(f"expected +1 or -1, got {p!r}", pos)
                vals.append(1 if p != "-1" else -1)
            rows.append(vals)
        pos += len(ln) + 1
    if not rows:
        raise ParseError("no code rows", 0)
    return np.array(rows, dtype=np.int8)


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON-serializable: {type(o).__name__}")


@dataclass
class ResultDocument:
    """One experiment result: parameter echo plus statistics.

    ``params`` must fully determine the run so that re-running with the
    echoed parameters reproduces the document bit for bit.
    """

    kind: str
    params: dict
    stats: dict
    arrays: dict = field(default_factory=dict)
    schema_version: str = "1"

    def to_json(self) -> str:
        payload = {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "params": self.params,
            "stats": self.stats,
            "arrays": self.arrays,
        }
        return json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ResultDocument":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", e.pos) from None
        version = payload.get("schema_version")
        if version != "1":
            raise ParseError(f"unsupported schema_version {version!r}", 0)
        for key in ("kind", "params", "stats"):
            if key not in payload:
                raise ParseError(f"missing required key {key!r}", 0)
        return cls(
            kind=payload["kind"],
            params=payload["params"],
            stats=payload["stats"],
            arrays=payload.get("arrays", {}),
            schema_version="1",
        )


def save_result(doc: ResultDocument, path) -> None:
    Path(path).write_text(doc.to_json())


def load_result(path) -> ResultDocument:
    return ResultDocument.from_json(Path(path).read_text())


def generate_pointset(kind: str, n: int, N: int, seed: int, params=None) -> PointSet:
    """Synthetic unit-vector families covering the coherence spectrum.

    uniform_sphere
        Normalized Gaussian rows, the generic low-coherence case.
    flat_signs
        Random sign patterns scaled by 1/sqrt(n); infinity norm is exactly
        1/sqrt(n), the smallest a unit vector allows.
    spiky
        Standard basis vectors plus small Gaussian noise (params["noise"],
        default 0.01), renormalized; coherence near 1.
    clustered_pairs
        N/2 random base points, each followed by a partner rotated away by
        a fixed angle params["theta"] (normalized units, default 0.1).
    """
    if n < 2 or N < 1:
        raise ValueError(f"need n >= 2 and N >= 1, got n={n}, N={N}")
    params = dict(params or {})
    rng = Rng(seed)
    if kind == "uniform_sphere":
        raw = rng.stream("pointset:uniform_sphere").normals(N * n).reshape(N, n)
        rows = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    elif kind == "flat_signs":
        signs = rng.stream("pointset:flat_signs").rademacher(N * n).reshape(N, n)
        rows = signs / math.sqrt(n)
    elif kind == "spiky":
        noise = float(params.pop("noise", 0.01))
        raw = noise * rng.stream("pointset:spiky").normals(N * n).reshape(N, n)
        raw[np.arange(N), np.arange(N) % n] += 1.0
        rows = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    elif kind == "clustered_pairs":
        theta = float(params.pop("theta", 0.1))
        if N % 2:
            raise ValueError("clustered_pairs needs an even N")
        if not 0.0 < theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {theta}")
        s = rng.stream("pointset:clustered_pairs")
        half = N // 2
        base = s.normals(half * n).reshape(half, n)
        base /= np.linalg.norm(base, axis=1, keepdims=True)
        aux = s.normals(half * n).reshape(half, n)
        aux -= np.sum(aux * base, axis=1, keepdims=True) * base
        aux /= np.linalg.norm(aux, axis=1, keepdims=True)
        ang = theta * math.pi
        partners = math.cos(ang) * base + math.sin(ang) * aux
        rows = np.empty((N, n))
        rows[0::2] = base
        rows[1::2] = partners
    else:
        raise ValueError(f"unknown point-set kind {kind!r}")
    if params:
        raise ValueError(f"unused params for kind {kind!r}: {sorted(params)}")
    return PointSet(rows)
