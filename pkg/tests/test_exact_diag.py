import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nmrqsim.errors import InvalidInputError
from nmrqsim.exact_diag import determinant, eigen_decompose, verify_eigenvalue
from nmrqsim.spin_system import SULFANOL_REFERENCE_MATRIX

from . import frozen
from .conftest import random_pauli_sum


def test_sulfanol_eigenvalues_frozen(ham):
    d = eigen_decompose(ham)
    np.testing.assert_allclose(d.eigenvalues, frozen.QUOTED_EIGENVALUES, atol=1e-8)


def test_reference_matrix_eigenvalues_frozen():
    d = eigen_decompose(SULFANOL_REFERENCE_MATRIX)
    np.testing.assert_allclose(d.eigenvalues, frozen.REFERENCE_EIGENVALUES, atol=1e-8)


@pytest.mark.parametrize("method", ["jacobi", "lapack"])
@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
def test_decomposition_properties(method, seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim))
    a = a + a.T
    d = eigen_decompose(a, method=method)
    v = d.eigenvectors
    np.testing.assert_allclose(v.conj().T @ v, np.eye(dim), atol=1e-9)
    np.testing.assert_allclose(d.reconstruct(), a, atol=1e-9)
    np.testing.assert_allclose(d.eigenvalues, np.linalg.eigvalsh(a), atol=1e-9)
    assert np.all(np.diff(d.eigenvalues) >= 0)


@given(st.integers(0, 2**32 - 1))
def test_complex_hermitian_input(seed):
    rng = np.random.default_rng(seed)
    h = random_pauli_sum(rng, 2, 6).to_dense()
    d = eigen_decompose(h)
    np.testing.assert_allclose(d.reconstruct(), h, atol=1e-9)


def test_gauge_fixed_largest_component_positive(ham):
    v = eigen_decompose(ham).eigenvectors
    for k in range(v.shape[1]):
        big = v[np.argmax(np.abs(v[:, k])), k]
        assert big.real > 0 and abs(big.imag) < 1e-14


def test_degenerate_spectrum():
    d = eigen_decompose(np.diag([2.0, 1.0, 2.0, 1.0]))
    np.testing.assert_allclose(d.eigenvalues, [1, 1, 2, 2])
    np.testing.assert_allclose(d.reconstruct(), np.diag([2.0, 1.0, 2.0, 1.0]), atol=1e-12)


def test_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        eigen_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InvalidInputError):
        eigen_decompose(np.zeros((2, 3)))
    with pytest.raises(InvalidInputError):
        eigen_decompose(np.eye(2), method="qr")


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_determinant_matches_numpy(seed, dim):
    a = np.random.default_rng(seed).normal(size=(dim, dim))
    assert determinant(a) == pytest.approx(np.linalg.det(a), rel=1e-9, abs=1e-12)
    assert determinant(np.zeros((dim, dim))) == 0


def test_verify_eigenvalue_on_reference_matrix():
    m = SULFANOL_REFERENCE_MATRIX
    for lam in frozen.REFERENCE_EIGENVALUES:
        assert verify_eigenvalue(m, lam)
    for lam in (0.0, -4970.92, -4971.0, 3000.0):
        assert not verify_eigenvalue(m, lam)


def test_verify_tolerance_controls_acceptance():
    m = SULFANOL_REFERENCE_MATRIX
    off = frozen.REFERENCE_EIGENVALUES[0] + 2.0
    assert not verify_eigenvalue(m, off, tol=1e-6)
    assert verify_eigenvalue(m, off, tol=1e-3)


def test_verify_zero_matrix():
    assert verify_eigenvalue(np.zeros((2, 2)), 0.0)
