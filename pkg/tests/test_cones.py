import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftlab import cones as cn
from liftlab import numerics as nx
from liftlab.errors import InvalidInput


def test_zero_vector_inside_every_cone(rng):
    cones = [
        cn.Simplex(3).cone_at(np.array([1.0, 0.0, 0.0])),
        cn.Ball(3).cone_at(np.array([1.0, 0.0, 0.0])),
        cn.BoundedRank(2, 2, 1).cone_at(np.zeros(4)),
        cn.PsdBoundedRank(3, 1).cone_at(np.zeros(9)),
    ]
    for cone in cones:
        res = cn.member(cone, np.zeros(cone.ambient_dim))
        assert res.inside and res.violation == 0.0


def test_simplex_cone_at_vertex():
    cone = cn.Simplex(3).cone_at(np.array([1.0, 0.0, 0.0]))
    assert cn.member(cone, np.array([-1.0, 1.0, 0.0])).inside
    res = cn.member(cone, np.array([1.0, -1.0, 0.0]))
    assert not res.inside
    assert abs(res.violation - 1.0) < 1e-12


def test_simplex_cone_matches_brute_force_at_vertex(rng):
    # brute-force directions from sampled simplex points land in the cone
    simplex = cn.Simplex(3)
    x = np.array([1.0, 0.0, 0.0])
    cone = cn.cone_at(simplex, x)
    for d in cn.empirical_tangents(simplex, x, 200, rng):
        assert cn.member(cone, d, tol=1e-3).inside


def test_bounded_rank_cone_violation_at_origin():
    cone = cn.BoundedRank(2, 2, 1).cone_at(np.zeros(4))
    res = cn.member(cone, np.eye(2).reshape(-1))
    assert not res.inside
    assert abs(res.violation - 1.0) < 1e-12
    assert cn.member(cone, np.outer([1.0, 0.0], [0.0, 1.0]).reshape(-1)).inside


def test_stationarity_gap_zero_costate():
    cone = cn.Simplex(4).cone_at(np.array([0.25, 0.25, 0.25, 0.25]))
    assert cn.stationarity_gap(cone, np.zeros(4)) == 0.0


def test_subspace_gap_is_negative_projection(rng):
    basis = nx.range_basis(rng.standard_normal((5, 2)))
    cone = cn.SubspaceCone(basis)
    w = rng.standard_normal(5)
    gap, d = cn.stationarity_gap(cone, w, with_direction=True)
    assert np.isclose(gap, -np.linalg.norm(basis.T @ w))
    assert cn.member(cone, d, tol=1e-9).inside
    assert np.isclose(w @ d, gap)


def test_polyhedral_gap_against_sampling(rng):
    cone = cn.Simplex(4).cone_at(np.array([0.6, 0.4, 0.0, 0.0]))
    for _ in range(10):
        w = rng.standard_normal(4)
        gap, d = cn.stationarity_gap(cone, w, with_direction=True)
        samples = cn.sample_directions(cone, 300, rng)
        sampled = min(float(w @ v) for v in samples)
        assert gap <= sampled + 1e-9
        if d is not None:
            assert cn.member(cone, d, tol=1e-8).inside
            assert np.isclose(float(w @ d), gap, atol=1e-9)


def test_bounded_rank_gap_dual_trivial(rng):
    # at a rank-deficient point every nonzero costate sees a descent direction
    X = np.outer([1.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    cone = cn.BoundedRank(3, 3, 2).cone_at(X.reshape(-1))
    for _ in range(20):
        w = rng.standard_normal(9)
        gap, d = cn.stationarity_gap(cone, w, with_direction=True)
        assert gap < -1e-6 * np.linalg.norm(w)
        assert cn.member(cone, d, tol=1e-9).inside
        assert np.isclose(float(w @ d), gap, atol=1e-9)


def test_bounded_rank_gap_exact_value():
    # block structure: free part plus top-q singular values of the corner
    cone = cn.BoundedRank(2, 2, 1).cone_at(np.zeros(4))
    gap = cn.stationarity_gap(cone, np.eye(2).reshape(-1))
    assert np.isclose(gap, -1.0)


def test_psd_cone_membership_blocks(rng):
    n, r = 4, 2
    R = rng.standard_normal((n, 1))
    X = (R @ R.T).reshape(-1)
    cone = cn.cone_at(cn.PsdBoundedRank(n, r), X)
    assert cone.s == 1 and cone.budget == 1
    U = cone.U
    # corner psd rank-1 direction is a member
    b = rng.standard_normal(n - 1)
    D = np.zeros((n, n))
    D[1:, 1:] = np.outer(b, b)
    v = (U @ D @ U.T).reshape(-1)
    assert cn.member(cone, v / np.linalg.norm(v), tol=1e-10).inside
    # corner with a negative eigenvalue is rejected
    D[1:, 1:] = -np.outer(b, b)
    v = (U @ D @ U.T).reshape(-1)
    assert not cn.member(cone, v / np.linalg.norm(v), tol=1e-3).inside


def test_psd_cone_dual_description(rng):
    n, r = 4, 2
    R = rng.standard_normal((n, 1))
    cone = cn.cone_at(cn.PsdBoundedRank(n, r), (R @ R.T).reshape(-1))
    U, s = cone.U, cone.s
    for _ in range(25):
        # dual members: U diag(0, W3) U' with W3 psd
        B = rng.standard_normal((n - s, n - s))
        W3 = B @ B.T
        D = np.zeros((n, n))
        D[s:, s:] = W3
        w = (U @ D @ U.T).reshape(-1)
        assert cn.stationarity_gap(cone, w) >= -1e-9
        # flipping the sign produces a violated costate
        D[s:, s:] = -W3
        w_bad = (U @ D @ U.T).reshape(-1)
        gap, d = cn.stationarity_gap(cone, w_bad, with_direction=True)
        assert gap <= -1e-4
        assert cn.member(cone, d, tol=1e-9).inside


def test_psd_gap_matches_sampling_bound(rng):
    n, r = 4, 2
    R = rng.standard_normal((n, 1))
    cone = cn.cone_at(cn.PsdBoundedRank(n, r), (R @ R.T).reshape(-1))
    w = (lambda A: (A + A.T).reshape(-1) / 2)(rng.standard_normal((n, n)))
    gap, d = cn.stationarity_gap(cone, w, with_direction=True)
    sampled = min(float(w @ v) for v in cn.sample_directions(cone, 2000, rng))
    assert gap <= sampled + 1e-9
    assert np.isclose(float(w @ d), gap, atol=1e-9)


def test_product_cone_memberwise(rng):
    s = cn.stochastic_matrices(3, 2)
    x = np.concatenate([[1.0, 0.0, 0.0], [0.2, 0.3, 0.5]])
    cone = cn.cone_at(s, x)
    v_good = np.concatenate([[-1.0, 0.5, 0.5], [0.1, -0.1, 0.0]])
    assert cn.member(cone, v_good, tol=1e-10).inside
    v_bad = np.concatenate([[1.0, -1.0, 0.0], [0.1, -0.1, 0.0]])
    assert not cn.member(cone, v_bad, tol=1e-6).inside


def test_union_cone_nodal_node():
    cone = cn.NodalCubic().cone_at(np.zeros(2))
    assert isinstance(cone, cn.UnionCone)
    one = np.array([1.0, 1.0]) / np.sqrt(2.0)
    other = np.array([1.0, -1.0]) / np.sqrt(2.0)
    assert cn.member(cone, one, tol=1e-10).inside
    assert cn.member(cone, other, tol=1e-10).inside
    assert not cn.member(cone, np.array([1.0, 0.0]), tol=1e-3).inside
    gap = cn.stationarity_gap(cone, np.array([-1.0, -1.0]))
    assert np.isclose(gap, -np.sqrt(2.0), atol=1e-12)


def test_rank1_tensor_cone(rng):
    cone = cn.Rank1Tensors((2, 2, 2)).cone_at(np.zeros(8))
    u = rng.standard_normal(2)
    v = rng.standard_normal(2)
    w = rng.standard_normal(2)
    t = np.multiply.outer(np.multiply.outer(u, v), w).reshape(-1)
    assert cn.member(cone, t / np.linalg.norm(t), tol=1e-8).inside
    # a generic sum of two spread rank-1 terms is not rank one
    t2 = np.multiply.outer(np.multiply.outer([1.0, 0.0], [1.0, 0.0]), [1.0, 0.0]) \
        + np.multiply.outer(np.multiply.outer([0.0, 1.0], [0.0, 1.0]), [0.0, 1.0])
    t2 = t2.reshape(-1) / np.linalg.norm(t2)
    assert not cn.member(cone, t2, tol=1e-3).inside
    gap = cn.stationarity_gap(cone, np.ones(8))
    assert gap <= -1e-4


def test_sample_directions_members_and_span(rng):
    sets_and_points = [
        (cn.Simplex(4), cn.Simplex(4).sample(rng)),
        (cn.Ball(3), np.array([1.0, 0.0, 0.0])),
        (cn.PsdBoundedRank(3, 1), np.zeros(9)),
    ]
    for set_desc, x in sets_and_points:
        cone = cn.cone_at(set_desc, x)
        samples = cn.sample_directions(cone, 60, rng)
        assert all(cn.member(cone, v, tol=1e-10).inside for v in samples)
        assert nx.numerical_rank(np.array(samples)) == cone.span_dim()


def test_empirical_tangents_simplex_interior(rng):
    simplex = cn.Simplex(4)
    x = np.full(4, 0.25)
    ds = cn.empirical_tangents(simplex, x, 100, rng)
    assert all(np.linalg.norm(d) <= 1.0 + 1e-12 for d in ds)
    assert nx.numerical_rank(np.array(ds)) == 3  # fills the zero-sum subspace


def test_empirical_tangents_bounded_rank(rng):
    set_desc = cn.BoundedRank(3, 3, 1)
    X = np.outer([1.0, 2.0, 0.0], [0.0, 1.0, 1.0])
    X = X / np.linalg.norm(X)
    cone = cn.cone_at(set_desc, X.reshape(-1))
    for d in cn.empirical_tangents(set_desc, X.reshape(-1), 100, rng):
        assert cn.member(cone, d, tol=1e-3).inside


def test_empirical_tangents_ball_boundary(rng):
    ball = cn.Ball(3)
    x = np.array([0.0, 0.0, 1.0])
    for d in cn.empirical_tangents(ball, x, 100, rng):
        assert float(d @ x) <= 1e-3


def test_slice_cone_subspace_case(rng):
    # full-rank base point: the sliced cone is an honest subspace
    n, r, m = 4, 2, 2
    rng2 = np.random.default_rng(3)
    A_list = tuple(0.5 * (a + a.T) for a in (rng2.standard_normal((n, n)) for _ in range(m)))
    R0 = rng2.standard_normal((n, r))
    b_list = tuple(float(np.sum((A @ R0) * R0)) for A in A_list)
    sdp = cn.SmoothSdpSlice(A_list, b_list, n, r)
    x = (R0 @ R0.T).reshape(-1)
    cone = cn.cone_at(sdp, x)
    sub = cone.as_subspace()
    assert sub is not None
    for d in cn.empirical_tangents(sdp, x, 50, rng):
        assert cn.member(cone, d, tol=1e-3).inside
        assert max(abs(float(np.sum(A * d.reshape(n, n)))) for A in A_list) <= 1e-6


def test_cone_at_rejects_infeasible():
    with pytest.raises(InvalidInput):
        cn.cone_at(cn.Simplex(3), np.array([0.6, 0.6, 0.0]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_member_sign_symmetry_for_subspaces(seed):
    rng = np.random.default_rng(seed)
    basis = nx.range_basis(rng.standard_normal((4, 2)))
    cone = cn.SubspaceCone(basis)
    v = basis @ rng.standard_normal(2)
    if np.linalg.norm(v) > 1e-9:
        v /= np.linalg.norm(v)
        assert cn.member(cone, v, tol=1e-10).inside
        assert cn.member(cone, -v, tol=1e-10).inside


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_psd_rank_cone_one_sided(seed):
    rng = np.random.default_rng(seed)
    cone = cn.cone_at(cn.PsdBoundedRank(3, 1), np.zeros(9))
    b = rng.standard_normal(3)
    if np.linalg.norm(b) > 1e-6:
        v = np.outer(b, b).reshape(-1)
        v /= np.linalg.norm(v)
        assert cn.member(cone, v, tol=1e-10).inside
        assert not cn.member(cone, -v, tol=1e-6).inside
