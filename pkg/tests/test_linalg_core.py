import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dwellcert.errors import DwellCertError
from dwellcert.linalg_core import (EXACT_2X2, POWER_ITERATION, as_matrix, commutator, mat_mul,
                                   mat_pow, spectral_norm)
from oracles import spectral_norm_oracle

A1 = np.array([[0.02, 0.93], [-0.53, -0.92]])
A2 = np.array([[0.04, 0.09], [0.08, -0.11]])


def square(d, bound=3.0):
    return arrays(np.float64, (d, d), elements=st.floats(-bound, bound, allow_nan=False, width=64))


def test_mat_mul_identity_and_zero():
    assert np.array_equal(mat_mul(np.eye(2), np.eye(2)), np.eye(2))
    assert np.array_equal(mat_mul(A1, np.zeros((2, 2))), np.zeros((2, 2)))


def test_mat_mul_example_product():
    # hand multiplication of the 2x2 entries
    expected = np.array([[0.02 * 0.04 + 0.93 * 0.08, 0.02 * 0.09 - 0.93 * 0.11],
                         [-0.53 * 0.04 - 0.92 * 0.08, -0.53 * 0.09 + 0.92 * 0.11]])
    assert np.allclose(mat_mul(A1, A2), expected, atol=1e-15)
    assert np.allclose(expected, [[0.0752, -0.1005], [-0.0948, 0.0535]], atol=1e-12)


def test_mat_mul_dim_mismatch():
    with pytest.raises(DwellCertError) as exc:
        mat_mul(np.eye(2), np.eye(3))
    assert exc.value.code == "dim-mismatch"


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.ones(3), [[np.nan, 0], [0, 1]], [[np.inf, 0], [0, 1]]])
def test_as_matrix_rejects(bad):
    with pytest.raises(DwellCertError):
        as_matrix(bad)


def test_mat_pow():
    assert np.array_equal(mat_pow(A1, 0), np.eye(2))
    assert spectral_norm(mat_pow(A1, 3)).value == pytest.approx(0.5404, abs=1e-3)
    assert spectral_norm(mat_pow(A2, 2)).value == pytest.approx(0.0220, abs=1e-3)
    with pytest.raises(DwellCertError):
        mat_pow(A1, -1)


def test_spectral_norm_examples():
    assert spectral_norm(np.zeros((2, 2))).value == 0.0
    assert spectral_norm(np.zeros((4, 4))).value == 0.0
    assert spectral_norm(A1).value == pytest.approx(1.3683, abs=1e-3)
    assert spectral_norm([[3.0, 0.0], [0.0, 4.0]]).value == pytest.approx(4.0, rel=1e-15)
    big = np.diag([3.0, -4.0, 1.0, 2.0])
    assert spectral_norm(big).value == pytest.approx(4.0, rel=1e-12)


def test_norm_methods_and_error_bound():
    assert spectral_norm(A1).method == EXACT_2X2
    nv = spectral_norm(np.arange(9.0).reshape(3, 3))
    assert nv.method == POWER_ITERATION
    assert 0 <= nv.relative_error_bound <= 1e-10


def test_power_iteration_start_orthogonal_to_dominant_direction():
    # dominant right singular vector (1, -1, 0)/sqrt(2) is orthogonal to the all-ones start
    u = np.array([1.0, -1.0, 0.0]) / np.sqrt(2)
    w = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
    a = 5.0 * np.outer(u, u) + 1.0 * np.outer(w, w)
    assert spectral_norm(a).value == pytest.approx(5.0, rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 6).flatmap(square))
def test_spectral_norm_matches_jacobi_oracle(a):
    ref = spectral_norm_oracle(a)
    got = spectral_norm(a).value
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5).flatmap(lambda d: st.tuples(square(d), square(d))))
def test_norm_submultiplicative_and_subadditive(pair):
    a, b = pair
    na, nb = spectral_norm(a).value, spectral_norm(b).value
    assert spectral_norm(a @ b).value <= na * nb * (1 + 1e-10) + 1e-300
    assert spectral_norm(a + b).value <= na + nb + 1e-10


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4).flatmap(lambda d: st.tuples(square(d), square(d))),
       st.integers(1, 3), st.integers(1, 3))
def test_commutator_antisymmetry(pair, p, q):
    a, b = pair
    assert np.max(np.abs(commutator(a, b, p, q) + commutator(b, a, q, p))) <= 1e-15


def test_commutator_examples():
    assert not np.any(commutator(A1, A1, 2, 2))
    # different powers of one matrix commute up to rounding only
    assert np.max(np.abs(commutator(A1, A1, 2, 3))) <= 1e-15
    assert spectral_norm(commutator(A1, A2, 1, 1)).value == pytest.approx(0.2108, abs=1e-3)
    assert spectral_norm(commutator(A1, A2, 2, 2)).value == pytest.approx(0.0133, abs=1e-3)
    with pytest.raises(DwellCertError):
        commutator(A1, np.eye(3), 1, 1)
