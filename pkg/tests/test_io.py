import json
import math
import struct
import warnings

import numpy as np
import pytest

from circembed.errors import ParseError
from circembed.geometry import angular_distance, coherence
from circembed.io import (
    ResultDocument,
    generate_pointset,
    load_codes,
    load_pointset,
    load_pointset_csv,
    load_result,
    save_codes,
    save_pointset,
    save_pointset_csv,
    save_result,
)
from circembed.rng import Stream


def write_pset(path, rows):
    rows = np.asarray(rows, dtype="<f8")
    N, n = rows.shape
    path.write_bytes(b"PSET1" + struct.pack("<QQ", n, N) + rows.tobytes())


# ---------------------------------------------------------------- binary

def test_pset_file_size(tmp_path):
    ps = generate_pointset("flat_signs", 16, 4, 0)
    p = tmp_path / "a.pset"
    save_pointset(ps, p)
    assert p.stat().st_size == 21 + 8 * 4 * 16 == 533


def test_pset_round_trip_bit_exact(tmp_path):
    ps = generate_pointset("uniform_sphere", 8, 3, 7)
    p = tmp_path / "a.pset"
    save_pointset(ps, p)
    back = load_pointset(p)
    np.testing.assert_array_equal(back.points, ps.points)


def test_pset_bad_magic(tmp_path):
    p = tmp_path / "bad.pset"
    p.write_bytes(b"XSET1" + bytes(528))
    with pytest.raises(ParseError) as ei:
        load_pointset(p)
    assert ei.value.offset == 0


def test_pset_truncated_header(tmp_path):
    p = tmp_path / "short.pset"
    p.write_bytes(b"PSET1\x01\x02")
    with pytest.raises(ParseError) as ei:
        load_pointset(p)
    assert ei.value.offset == 7


def test_pset_length_mismatch(tmp_path):
    p = tmp_path / "len.pset"
    p.write_bytes(b"PSET1" + struct.pack("<QQ", 4, 2) + bytes(8 * 7))
    with pytest.raises(ParseError) as ei:
        load_pointset(p)
    assert ei.value.offset == 21 + 8 * 7  # file ends before the declared payload


def test_pset_bad_header_counts(tmp_path):
    p = tmp_path / "hdr.pset"
    p.write_bytes(b"PSET1" + struct.pack("<QQ", 1, 2) + bytes(16))  # n = 1
    with pytest.raises(ParseError) as ei:
        load_pointset(p)
    assert ei.value.offset == 5


def test_pset_non_finite_offset(tmp_path):
    rows = np.eye(4)[:2].copy()
    rows[1, 2] = np.nan  # flat index 6
    p = tmp_path / "nan.pset"
    write_pset(p, rows)
    with pytest.raises(ParseError) as ei:
        load_pointset(p)
    assert ei.value.offset == 21 + 8 * 6


def test_pset_zero_row_offset(tmp_path):
    rows = np.vstack([np.eye(3)[0], np.zeros(3)])
    p = tmp_path / "zero.pset"
    write_pset(p, rows)
    with pytest.raises(ParseError) as ei:
        load_pointset(p)
    assert ei.value.offset == 21 + 8 * 3  # start of row 1


def test_unit_policy_tiers(tmp_path):
    base = np.eye(3)[:1]
    # within 1e-9: bytes pass through untouched
    near = base * (1.0 + 5e-10)
    p = tmp_path / "near.pset"
    write_pset(p, near)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        got = load_pointset(p)
    np.testing.assert_array_equal(got.points, near)
    # between 1e-9 and 1e-6: silent renormalization
    mid = base * (1.0 + 1e-7)
    p2 = tmp_path / "mid.pset"
    write_pset(p2, mid)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        got = load_pointset(p2)
    np.testing.assert_allclose(got.points, base, atol=1e-15)
    # beyond 1e-6: renormalized with a warning
    far = base * 2.0
    p3 = tmp_path / "far.pset"
    write_pset(p3, far)
    with pytest.warns(UserWarning, match="renormalizing"):
        got = load_pointset(p3)
    np.testing.assert_allclose(got.points, base, atol=1e-15)


# ---------------------------------------------------------------- csv

def test_csv_round_trip_exact(tmp_path):
    ps = generate_pointset("uniform_sphere", 6, 5, 3)
    p = tmp_path / "pts.csv"
    save_pointset_csv(ps, p)
    assert p.read_text().startswith("dim=6\n")
    back = load_pointset_csv(p)
    # 17 significant digits round-trip float64 exactly
    np.testing.assert_array_equal(back.points, ps.points)


def test_csv_missing_header(tmp_path):
    p = tmp_path / "rows.csv"
    p.write_text("1.0,0.0\n")
    with pytest.raises(ParseError) as ei:
        load_pointset_csv(p)
    assert ei.value.offset == 0


def test_csv_field_count_offset(tmp_path):
    p = tmp_path / "ragged.csv"
    p.write_text("dim=2\n1.0,0.0\n0.0,1.0,9.0\n")
    with pytest.raises(ParseError) as ei:
        load_pointset_csv(p)
    assert ei.value.offset == len("dim=2\n1.0,0.0\n")


def test_csv_unparseable_float(tmp_path):
    p = tmp_path / "junk.csv"
    p.write_text("dim=2\nfoo,0.0\n")
    with pytest.raises(ParseError):
        load_pointset_csv(p)


# ---------------------------------------------------------------- codes

def test_codes_round_trip(tmp_path):
    codes = Stream(0, "codes").rademacher(24).reshape(4, 6).astype(np.int8)
    p = tmp_path / "codes.csv"
    save_codes(codes, p)
    first = p.read_text().splitlines()[0]
    assert set(first.split(",")) <= {"+1", "-1"}
    np.testing.assert_array_equal(load_codes(p), codes)


def test_codes_rejects_bad_token(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("+1,0\n")
    with pytest.raises(ParseError):
        load_codes(p)


def test_codes_rejects_ragged_rows(tmp_path):
    p = tmp_path / "ragged.csv"
    p.write_text("+1,-1\n+1,-1,+1\n")
    with pytest.raises(ParseError) as ei:
        load_codes(p)
    assert ei.value.offset == len("+1,-1\n")


# ---------------------------------------------------------------- results

def test_result_document_round_trip(tmp_path):
    doc = ResultDocument(
        kind="eval",
        params={"n": 8, "seed": 3, "delta": 0.15},
        stats={"max_distortion": 0.01},
        arrays={"per_pair": [0.1, 0.2]},
    )
    p = tmp_path / "doc.json"
    save_result(doc, p)
    text = p.read_text()
    assert text.endswith("\n")
    assert json.loads(text)["schema_version"] == "1"
    # keys are sorted for byte-stable output
    assert text == json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n"
    back = load_result(p)
    assert back == doc


def test_result_document_rejects_wrong_version():
    text = json.dumps({"schema_version": "2", "kind": "x", "params": {}, "stats": {}})
    with pytest.raises(ParseError):
        ResultDocument.from_json(text)


def test_result_document_rejects_missing_key():
    text = json.dumps({"schema_version": "1", "kind": "x", "params": {}})
    with pytest.raises(ParseError, match="stats"):
        ResultDocument.from_json(text)


def test_result_document_rejects_invalid_json():
    with pytest.raises(ParseError):
        ResultDocument.from_json("{nope")


def test_result_document_coerces_numpy_scalars():
    doc = ResultDocument(
        kind="x",
        params={"k": np.int64(4)},
        stats={"m": np.float64(0.5), "v": np.arange(3.0)},
    )
    payload = json.loads(doc.to_json())
    assert payload["params"]["k"] == 4
    assert payload["stats"]["v"] == [0.0, 1.0, 2.0]


# ---------------------------------------------------------------- generators

def test_generate_rejects_unknown_kind():
    with pytest.raises(ValueError):
        generate_pointset("torus", 8, 4, 0)


def test_generate_rejects_unused_params():
    with pytest.raises(ValueError, match="unused"):
        generate_pointset("uniform_sphere", 8, 4, 0, params={"theta": 0.2})


def test_generate_is_deterministic():
    a = generate_pointset("uniform_sphere", 16, 4, 5)
    b = generate_pointset("uniform_sphere", 16, 4, 5)
    np.testing.assert_array_equal(a.points, b.points)
    c = generate_pointset("uniform_sphere", 16, 4, 6)
    assert not np.array_equal(a.points, c.points)


def test_flat_signs_coherence_exact():
    ps = generate_pointset("flat_signs", 16, 8, 1)
    assert set(np.abs(ps.points).ravel().tolist()) == {0.25}
    assert coherence(ps).rho_direct == 0.25


def test_clustered_pairs_angles():
    ps = generate_pointset("clustered_pairs", 32, 10, 2, params={"theta": 0.2})
    for i in range(0, 10, 2):
        ang = angular_distance(ps.points[i], ps.points[i + 1])
        assert math.isclose(ang, 0.2, abs_tol=1e-9)


def test_clustered_pairs_validation():
    with pytest.raises(ValueError, match="even"):
        generate_pointset("clustered_pairs", 8, 5, 0)
    with pytest.raises(ValueError, match="theta"):
        generate_pointset("clustered_pairs", 8, 4, 0, params={"theta": 1.5})


def test_spiky_is_nearly_axis_aligned():
    ps = generate_pointset("spiky", 8, 12, 4)
    assert coherence(ps).rho_direct > 0.95
    # spikes walk the axes cyclically
    assert int(np.argmax(np.abs(ps.points[9]))) == 9 % 8


def test_uniform_sphere_coherence_bound():
    # generic random points are flat: inf norm stays under 6 sqrt(ln n / n)
    n = 1024
    cap = 6.0 * math.sqrt(math.log(n) / n)
    for seed in range(100):
        ps = generate_pointset("uniform_sphere", n, 100, seed)
        assert float(np.abs(ps.points).max()) <= cap


def test_all_kinds_yield_unit_rows():
    for kind, params in [
        ("uniform_sphere", None),
        ("flat_signs", None),
        ("spiky", {"noise": 0.05}),
        ("clustered_pairs", {"theta": 0.3}),
    ]:
        ps = generate_pointset(kind, 16, 6, 9, params=params)
        np.testing.assert_allclose(np.linalg.norm(ps.points, axis=1), 1.0, atol=1e-9)
