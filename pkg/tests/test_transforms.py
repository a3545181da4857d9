import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from circembed.rng import Stream
from circembed.transforms import (
    IndexSet,
    circulant_apply,
    fwht,
    hadamard_matrix,
    naive_circulant_apply,
    restrict,
    shift,
)

unit_range = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def vectors(n):
    return hnp.arrays(np.float64, n, elements=unit_range)


# ---------------------------------------------------------------- shift

def test_shift_hand_values():
    x = np.array([10.0, 20.0, 30.0, 40.0])
    np.testing.assert_array_equal(shift(x, 0), x)
    np.testing.assert_array_equal(shift(x, 1), [20.0, 30.0, 40.0, 10.0])
    np.testing.assert_array_equal(shift(x, 3), [40.0, 10.0, 20.0, 30.0])


def test_shift_rejects_out_of_range():
    x = np.ones(4)
    with pytest.raises(ValueError):
        shift(x, 4)
    with pytest.raises(ValueError):
        shift(x, -1)


@given(st.data())
@settings(max_examples=50, deadline=None)
def test_shift_inverse_and_norm(data):
    n = data.draw(st.integers(1, 32))
    x = data.draw(vectors(n))
    i = data.draw(st.integers(0, n - 1))
    y = shift(x, i)
    assert math.isclose(np.linalg.norm(y), np.linalg.norm(x), abs_tol=1e-12)
    np.testing.assert_array_equal(shift(y, (n - i) % n), x)


# ---------------------------------------------------------------- circulant
# The naive form is the oracle: an explicit dense matrix-vector product with
# no FFT anywhere, so the fast path is checked against independent arithmetic.

def test_naive_circulant_identity_filter():
    # h = e0 makes row i the i-step shift of e0, so output picks x reversed
    # after the first entry: [a, d, c, b] for x = [a, b, c, d]
    h = np.array([1.0, 0.0, 0.0, 0.0])
    x = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_allclose(naive_circulant_apply(h, x), [1.0, 4.0, 3.0, 2.0])


def test_naive_circulant_ones_filter():
    # every row of the all-ones circulant sums x
    x = np.array([1.0, -2.0, 5.0, 0.5])
    np.testing.assert_allclose(naive_circulant_apply(np.ones(4), x), np.full(4, 4.5))


def test_fft_matches_naive_hand_case():
    h = np.array([1.0, 0.0, 0.0, 0.0])
    x = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_allclose(circulant_apply(h, x), [1.0, 4.0, 3.0, 2.0], atol=1e-12)


@pytest.mark.parametrize("n", [4, 64, 1024])
def test_fft_matches_naive_random(n):
    s = Stream(17, f"circ:{n}")
    for _ in range(5):
        h = s.normals(n)
        x = s.normals(n)
        np.testing.assert_allclose(
            circulant_apply(h, x), naive_circulant_apply(h, x), atol=1e-10
        )


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_circulant_bilinear(data):
    n = data.draw(st.sampled_from([4, 8, 16]))
    h = data.draw(vectors(n))
    x = data.draw(vectors(n))
    y = data.draw(vectors(n))
    a = data.draw(st.floats(-3, 3, allow_nan=False))
    lhs = circulant_apply(h, a * x + y)
    rhs = a * circulant_apply(h, x) + circulant_apply(h, y)
    scale = max(1.0, np.abs(rhs).max())
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * scale)


def test_circulant_rejects_mismatched_lengths():
    with pytest.raises(ValueError):
        circulant_apply(np.ones(4), np.ones(8))


# ---------------------------------------------------------------- fwht

def test_fwht_two_point():
    np.testing.assert_allclose(
        fwht([1.0, 0.0]), [1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-15
    )


def test_fwht_matches_dense_hadamard():
    # dense Sylvester matrix is the oracle for the butterfly
    for n in (1, 2, 4, 8, 16, 64):
        H = hadamard_matrix(n)
        v = Stream(23, f"fwht:{n}").normals(n)
        np.testing.assert_allclose(fwht(v), H @ v, atol=1e-12)


def test_fwht_involution():
    v = Stream(23, "invol").normals(8)
    np.testing.assert_allclose(fwht(fwht(v)), v, atol=1e-12)


def test_fwht_preserves_norm():
    v = Stream(23, "norm").normals(1024)
    assert math.isclose(
        np.linalg.norm(fwht(v)), np.linalg.norm(v), rel_tol=1e-12
    )


def test_fwht_does_not_mutate_input():
    v = np.ones(8)
    fwht(v)
    np.testing.assert_array_equal(v, np.ones(8))


@pytest.mark.parametrize("n", [3, 6, 12, 1000])
def test_fwht_rejects_non_power_of_two(n):
    with pytest.raises(ValueError):
        fwht(np.ones(n))


# ---------------------------------------------------------------- hadamard

def test_hadamard_matrix_orthonormal():
    for n in (1, 2, 4, 16):
        H = hadamard_matrix(n)
        np.testing.assert_allclose(H @ H.T, np.eye(n), atol=1e-12)


def test_hadamard_matrix_sign_pattern():
    # entry (i, j) of the unnormalized Sylvester matrix is (-1)^{popcount(i & j)}
    n = 16
    H = hadamard_matrix(n) * math.sqrt(n)
    i, j = np.indices((n, n))
    popcount = np.vectorize(lambda v: bin(v).count("1"))(i & j)
    np.testing.assert_allclose(H, np.where(popcount % 2 == 0, 1.0, -1.0))


def test_hadamard_matrix_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        hadamard_matrix(12)


# ---------------------------------------------------------------- restrict

def test_restrict_hand_case():
    x = np.array([5.0, 6.0, 7.0, 8.0])
    np.testing.assert_array_equal(restrict(x, [2, 0]), [7.0, 5.0])


def test_restrict_accepts_index_set():
    x = np.arange(6.0)
    S = IndexSet(indices=np.array([1, 4]), n=6)
    np.testing.assert_array_equal(restrict(x, S), [1.0, 4.0])


def test_restrict_rejects_out_of_range():
    with pytest.raises(ValueError):
        restrict(np.ones(4), [0, 4])


def test_index_set_validation():
    with pytest.raises(ValueError):
        IndexSet(indices=np.array([0, 0]), n=4)  # duplicates
    with pytest.raises(ValueError):
        IndexSet(indices=np.array([4]), n=4)  # out of range
    with pytest.raises(ValueError):
        IndexSet(indices=np.array([], dtype=np.int64), n=4)  # empty
