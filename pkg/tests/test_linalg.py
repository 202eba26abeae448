import numpy as np
import pytest
from hypothesis import given, strategies as st

from freegrass import linalg
from conftest import seeds


def naive_product(a, b):
    out = np.zeros((a.shape[0], b.shape[1]), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[i, j] += a[i, k] * b[k, j]
    return out


def test_multiply_identity_and_units():
    a = linalg.ginibre(2, np.random.default_rng(0))
    assert np.array_equal(linalg.multiply(np.eye(2), a), a)
    e12, e21 = np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])
    assert np.array_equal(linalg.multiply(e12, e21), np.array([[1, 0], [0, 0]]))


@given(seeds)
def test_multiply_matches_triple_loop(seed):
    rng = np.random.default_rng(seed)
    a, b = linalg.ginibre(3, rng), linalg.ginibre(3, rng)
    assert np.max(np.abs(linalg.multiply(a, b) - naive_product(a, b))) <= 1e-13


def test_multiply_dimension_mismatch():
    with pytest.raises(ValueError):
        linalg.multiply(np.ones((2, 3)), np.ones((2, 3)))


def test_inverse_examples():
    assert np.allclose(linalg.inverse(np.eye(4)), np.eye(4))
    assert np.allclose(linalg.inverse([[1, 1], [0, 1]]), [[1, -1], [0, 1]])
    with pytest.raises(linalg.SingularMatrix):
        linalg.inverse([[1, 1], [1, 1]])


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        linalg.as_matrix([[1, np.nan], [0, 1]])


@given(seeds)
def test_inverse_roundtrip(seed):
    a = linalg.ginibre(5, np.random.default_rng(seed)) + 4 * np.eye(5)
    assert np.max(np.abs(a @ linalg.inverse(a) - np.eye(5))) <= 1e-10
    assert np.max(np.abs(linalg.inverse(linalg.inverse(a)) - a)) <= 1e-9


def test_spectral_norm_examples():
    assert linalg.spectral_norm(np.eye(3)) == pytest.approx(1.0)
    assert linalg.spectral_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0)
    assert linalg.spectral_norm([[0, 1], [0, 0]]) == pytest.approx(1.0)


@given(seeds)
def test_spectral_norm_invariances(seed):
    rng = np.random.default_rng(seed)
    a, b = linalg.ginibre(4, rng), linalg.ginibre(4, rng)
    u, v = linalg.haar_unitary(4, rng), linalg.haar_unitary(4, rng)
    na = linalg.spectral_norm(a)
    assert abs(linalg.spectral_norm(u @ a @ v) - na) <= 1e-9 * max(1, na)
    assert linalg.spectral_norm(a @ b) <= na * linalg.spectral_norm(b) * (1 + 1e-12)


def test_hermitian_min_eigenvalue():
    assert linalg.hermitian_min_eigenvalue(np.eye(3)) == pytest.approx(1.0)
    assert linalg.hermitian_min_eigenvalue(np.diag([1.0, -2.0])) == pytest.approx(-2.0)
    a = linalg.ginibre(4, np.random.default_rng(1))
    assert linalg.hermitian_min_eigenvalue(a.conj().T @ a) >= -1e-12
    with pytest.raises(linalg.NotHermitian):
        linalg.hermitian_min_eigenvalue([[0, 1], [0, 0]])


@given(seeds, st.integers(min_value=1, max_value=8))
def test_haar_unitary_is_unitary(seed, n):
    u = linalg.haar_unitary(n, np.random.default_rng(seed))
    assert np.max(np.abs(u @ u.conj().T - np.eye(n))) <= 1e-10


def test_haar_first_moments():
    rng = np.random.default_rng(2024)
    samples = [linalg.haar_unitary(4, rng) for _ in range(10_000)]
    u11 = np.array([abs(u[0, 0]) ** 2 for u in samples])
    assert abs(u11.mean() - 0.25) <= 3 * u11.std(ddof=1) / np.sqrt(len(u11))
    traces = np.array([np.trace(u) for u in samples])
    assert abs(traces.mean()) <= 5 / np.sqrt(len(samples) * 4)


def test_stream_determinism():
    a = linalg.haar_unitary(5, linalg.stream(7, 100, 3))
    b = linalg.haar_unitary(5, linalg.stream(7, 100, 3))
    c = linalg.haar_unitary(5, linalg.stream(7, 100, 4))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.array_equal(linalg.stream(1, "label").random(3), linalg.stream(1, "label").random(3))
