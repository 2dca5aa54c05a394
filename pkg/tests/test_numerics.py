import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftlab import numerics as nx
from liftlab.errors import InvalidInput


def test_svd_identity():
    u, s, v = nx.svd(np.eye(2))
    assert np.allclose(s, [1.0, 1.0])


def test_svd_zero():
    _, s, _ = nx.svd(np.zeros((3, 2)))
    assert np.allclose(s, [0.0, 0.0])


def test_svd_diagonal_descending():
    # eigenvalues of A^T A are 9 and 16, so singular values are (4, 3)
    a = np.array([[3.0, 0.0], [0.0, 4.0]])
    _, s, _ = nx.svd(a)
    assert np.allclose(s, [4.0, 3.0])


def test_svd_rejects_nonfinite():
    with pytest.raises(InvalidInput):
        nx.svd(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_svd_reconstruction_on_random_matrices():
    rng = np.random.default_rng(7)
    for _ in range(100):
        m = int(rng.integers(1, 31))
        n = int(rng.integers(1, 31))
        a = rng.standard_normal((m, n))
        u, s, v = nx.svd(a)
        err = np.linalg.norm(u @ np.diag(s) @ v.T - a)
        assert err <= 1e-12 * max(1.0, np.linalg.norm(a))
        assert np.allclose(u.T @ u, np.eye(u.shape[1]), atol=1e-12)
        assert np.allclose(v.T @ v, np.eye(v.shape[1]), atol=1e-12)


def test_range_basis_zero_matrix():
    b = nx.range_basis(np.zeros((3, 2)))
    assert b.shape == (3, 0)


def test_range_basis_rank_one():
    b = nx.range_basis(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert b.shape == (2, 1)
    target = np.array([1.0, 2.0]) / np.sqrt(5.0)
    assert min(np.linalg.norm(b[:, 0] - target), np.linalg.norm(b[:, 0] + target)) < 1e-12


def test_range_basis_full_rank(rng):
    a = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    assert nx.range_basis(a).shape == (3, 3)


def test_kernel_basis_examples():
    b = nx.kernel_basis(np.array([[1.0, 0.0]]))
    assert b.shape == (2, 1)
    assert abs(abs(b[1, 0]) - 1.0) < 1e-12

    assert nx.kernel_basis(np.eye(4)).shape == (4, 0)

    b = nx.kernel_basis(np.array([[1.0, 1.0], [1.0, 1.0]]))
    target = np.array([1.0, -1.0]) / np.sqrt(2.0)
    assert b.shape == (2, 1)
    assert min(np.linalg.norm(b[:, 0] - target), np.linalg.norm(b[:, 0] + target)) < 1e-12


def test_pinv_diagonal():
    assert np.allclose(nx.pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))


def test_pinv_penrose_identities(rng):
    for _ in range(20):
        a = rng.standard_normal((5, 3))
        p = nx.pinv(a)
        assert np.allclose(a @ p @ a, a, atol=1e-10)
        assert np.allclose(p @ a @ p, p, atol=1e-10)
        assert np.allclose((a @ p).T, a @ p, atol=1e-10)
        assert np.allclose((p @ a).T, p @ a, atol=1e-10)


def test_pinv_involution_on_well_conditioned(rng):
    for _ in range(20):
        a = rng.standard_normal((6, 4))
        a = a + 0.0  # random Gaussian matrices are well conditioned w.h.p.
        err = np.linalg.norm(nx.pinv(nx.pinv(a)) - a) / np.linalg.norm(a)
        assert err < 1e-9


def test_sym_eig_offdiagonal():
    # characteristic polynomial of [[0,1],[1,0]] is l^2 - 1
    w, v = nx.sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(w, [-1.0, 1.0])
    assert np.allclose(v @ np.diag(w) @ v.T, [[0.0, 1.0], [1.0, 0.0]], atol=1e-12)


def test_sym_eig_rejects_nonsquare():
    with pytest.raises(InvalidInput):
        nx.sym_eig(np.zeros((2, 3)))


def test_min_norm_solve_lagrange():
    # minimizing ||x|| subject to x1 + x2 = 2 gives x = (1, 1)
    x = nx.min_norm_solve(np.array([[1.0, 1.0]]), np.array([2.0]))
    assert np.allclose(x, [1.0, 1.0])


def test_min_norm_solve_shape_mismatch():
    with pytest.raises(InvalidInput):
        nx.min_norm_solve(np.eye(2), np.ones(3))


def test_range_and_kernel_dims_complementary(rng):
    for _ in range(25):
        m = int(rng.integers(1, 9))
        n = int(rng.integers(1, 9))
        r = int(rng.integers(0, min(m, n) + 1))
        a = rng.standard_normal((m, r)) @ rng.standard_normal((r, n)) if r else np.zeros((m, n))
        assert nx.range_basis(a).shape[1] + nx.kernel_basis(a.T).shape[1] == m


def test_subspace_distance_detects_equality(rng):
    b = nx.range_basis(rng.standard_normal((6, 3)))
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    assert nx.subspaces_equal(b, b @ q)
    other = nx.range_basis(rng.standard_normal((6, 3)))
    assert nx.subspace_distance(b, other) > 1e-4


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 123456))
def test_rank_of_outer_products(m, n, seed):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(m)
    v = rng.standard_normal(n)
    a = np.outer(u, v)
    expected = 0 if np.linalg.norm(a) < 1e-12 else 1
    assert nx.numerical_rank(a) == expected


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 123456))
def test_kernel_vectors_annihilated(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n - 1, n))
    k = nx.kernel_basis(a)
    assert np.linalg.norm(a @ k) <= 1e-10 * max(1.0, np.linalg.norm(a))


def test_tolerance_policy_requires_positive():
    with pytest.raises(InvalidInput):
        nx.TolerancePolicy(rank_tol_factor=0.0)
