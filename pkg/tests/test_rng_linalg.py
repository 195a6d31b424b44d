import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from subspace_descent.linalg import (
    DimensionMismatchError,
    RankDeficiencyError,
    axpy,
    gaussian_matrix,
    matTvec,
    matvec,
    norm2,
    qr_thin,
)
from subspace_descent.rng import RngStream, as_stream


def test_same_stream_is_bit_identical():
    a = gaussian_matrix(RngStream(7, 3), 5, 4)
    b = gaussian_matrix(RngStream(7, 3), 5, 4)
    assert np.array_equal(a, b)


def test_distinct_streams_differ():
    a = RngStream(7, 0).standard_normal(1000)
    b = RngStream(7, 1).standard_normal(1000)
    assert not np.array_equal(a, b)
    # independent streams: sample correlation at the 4/sqrt(n) level
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(1000)


def test_single_draw_is_finite():
    z = gaussian_matrix(RngStream(1), 1, 1)
    assert z.shape == (1, 1) and np.isfinite(z[0, 0])


def test_gaussian_moments():
    n = 10**6
    z = gaussian_matrix(RngStream(11), 1000, 1000).ravel()
    assert abs(z.mean()) < 4 / np.sqrt(n)
    assert abs(z.var() - 1) < 0.01


def test_gaussian_ks():
    z = gaussian_matrix(RngStream(12), 1000, 100).ravel()
    assert stats.kstest(z, "norm").pvalue > 1e-3


def test_bad_dimensions():
    with pytest.raises(ValueError):
        gaussian_matrix(RngStream(0), 0, 3)


def test_as_stream():
    s = RngStream(3, 4)
    assert as_stream(s) is s
    assert as_stream(5).seed == 5
    with pytest.raises(TypeError):
        as_stream("x")


def test_qr_identity():
    Q, R = qr_thin(np.eye(3))
    assert np.allclose(Q, np.eye(3)) and np.allclose(R, np.eye(3))


def test_qr_orthogonal_columns():
    A = np.array([[2.0, 0], [0, 3], [0, 0]])
    Q, R = qr_thin(A)
    np.testing.assert_allclose(Q, [[1, 0], [0, 1], [0, 0]], atol=1e-15)
    np.testing.assert_allclose(R, np.diag([2.0, 3.0]), atol=1e-15)


def test_qr_random_reconstruction():
    A = gaussian_matrix(RngStream(5), 50, 5)
    Q, R = qr_thin(A)
    assert np.linalg.norm(Q.T @ Q - np.eye(5), 2) <= 1e-12
    assert np.linalg.norm(Q @ R - A, 2) <= 1e-12 * np.linalg.norm(A, 2)
    assert np.all(np.diag(R) > 0)
    assert np.allclose(np.triu(R), R)


@settings(max_examples=50, deadline=None)
@given(d=st.integers(1, 30), data=st.data(), seed=st.integers(0, 2**32))
def test_qr_property(d, data, seed):
    l = data.draw(st.integers(1, d))
    A = RngStream(seed).standard_normal((d, l))
    Q, R = qr_thin(A)
    assert np.linalg.norm(Q.T @ Q - np.eye(l), 2) <= 1e-12
    assert np.all(np.diag(R) > 0)


def test_qr_rank_deficient():
    A = np.ones((4, 2))
    with pytest.raises(RankDeficiencyError):
        qr_thin(A)


def test_qr_wide_rejected():
    with pytest.raises(DimensionMismatchError):
        qr_thin(np.ones((2, 3)))


def test_kernels_trivial():
    v = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(matvec(np.eye(3), v), v)
    assert norm2(np.eye(4)[0]) == 1.0
    assert np.array_equal(axpy(2.0, v, v), 3 * v)


def test_matvec_against_loops():
    A = RngStream(9).standard_normal((20, 20))
    x = RngStream(10).standard_normal(20)
    naive = np.array([sum(A[i, j] * x[j] for j in range(20)) for i in range(20)])
    naive_t = np.array([sum(A[j, i] * x[j] for j in range(20)) for i in range(20)])
    np.testing.assert_allclose(matvec(A, x), naive, rtol=0, atol=1e-14 * np.abs(A).sum())
    np.testing.assert_allclose(matTvec(A, x), naive_t, rtol=0, atol=1e-14 * np.abs(A).sum())


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        matvec(np.eye(3), np.ones(2))
    with pytest.raises(DimensionMismatchError):
        matTvec(np.eye(3, 2), np.ones(2))
    with pytest.raises(DimensionMismatchError):
        axpy(1.0, np.ones(2), np.ones(3))
