import numpy as np
import pytest

from liftlab import catalog as cat
from liftlab import cones as cn
from liftlab import lift_core as lc
from liftlab import manifold as mf
from liftlab import numerics as nx
from liftlab.errors import InvalidInput, NoDegeneracy, NoPathology


def default_entries():
    return [
        cat.hadamard(4),
        cat.hadprod(3, 2),
        cat.ball(3),
        cat.annulus(3, 0.8, 1.5),
        cat.psd_lowrank(4, 2),
        cat.burer_monteiro(4, 2, 2, seed=5),
        cat.lr(4, 3, 2),
        cat.desing_chart(3, 3, 2),
        cat.svd_lift(4, 3, 2),
        cat.msvd_lift(4, 3, 2),
        cat.cp_rank1((2, 2, 2)),
        cat.nodal_cubic(),
        cat.disk_quartic(),
        cat.eigen_simplex(4, seed=1),
    ]


@pytest.mark.parametrize("idx", range(14))
def test_image_lands_in_set(idx, rng):
    entry = default_entries()[idx]
    for _ in range(12):
        regime = entry.regimes[int(rng.integers(len(entry.regimes)))]
        y = entry.sample_point(regime, rng)
        assert mf.on_manifold_residual(entry.lift.manifold, y) <= 1e-9
        x = lc.value(entry.lift, y)
        assert entry.set_desc.residual(x) <= 1e-9, f"{entry.entry_id} at {regime}"


def test_build_registry():
    entry = cat.build("hadamard", n=3)
    assert entry.entry_id == "hadamard(3)"
    with pytest.raises(InvalidInput):
        cat.build("unknown_thing")


def test_svd_requires_strict_rank():
    with pytest.raises(InvalidInput):
        cat.svd_lift(3, 3, 3)


def test_nodal_cubic_image_invariant(rng):
    entry = cat.nodal_cubic()
    for t in np.linspace(-1.7, 1.7, 41):
        y = np.array([t * t - 1.0, t - t**3, t])
        x = lc.value(entry.lift, y)
        assert abs(x[1] ** 2 - x[0] ** 2 * (x[0] + 1.0)) <= 1e-12


def test_desing_closed_form_lq(rng):
    m, n, r = 3, 3, 2
    entry = cat.desing_chart(m, n, r)
    for _ in range(20):
        y = entry.sample_point("full_rank", rng)
        Z, W = y[: m * r].reshape(m, r), y[m * r:].reshape(r, n - r)
        v = rng.standard_normal(y.size)
        Zd, Wd = v[: m * r].reshape(m, r), v[m * r:].reshape(r, n - r)
        pt = lc.LiftPoint(entry.lift, y)
        lv = pt.L @ (pt.basis.T @ v)
        expected_l = np.hstack([-Zd @ W - Z @ Wd, Zd]).reshape(-1)
        assert np.allclose(lv, expected_l, atol=1e-9)
        q = lc.qmap(entry.lift, y, v)
        expected_q = np.hstack([-2.0 * Zd @ Wd, np.zeros((m, r))]).reshape(-1)
        assert np.allclose(q, expected_q, atol=1e-9)


def test_hadamard_closed_form_l(rng):
    entry = cat.hadamard(5)
    for _ in range(20):
        y = entry.sample_point("boundary", rng)
        v = mf.random_tangent(entry.lift.manifold, y, rng)
        pt = lc.LiftPoint(entry.lift, y)
        assert np.allclose(pt.L @ (pt.basis.T @ v), 2.0 * y * v, atol=1e-9)


def test_psd_closed_form_q_mod_iml(rng):
    entry = cat.psd_lowrank(4, 2)
    for _ in range(20):
        y = entry.sample_point("rank_deficient", rng)
        v = rng.standard_normal(8)
        q = lc.qmap(entry.lift, y, v)
        Vd = v.reshape(4, 2)
        diff = q - (2.0 * Vd @ Vd.T).reshape(-1)
        pt = lc.LiftPoint(entry.lift, y)
        resid = diff - nx.project_onto(pt.im_basis, diff)
        assert np.linalg.norm(resid) <= 1e-9


def test_lr_degenerate_directions(rng):
    entry = cat.lr(3, 4, 2)
    y = entry.sample_point("balanced_deficient", rng)
    pt = lc.LiftPoint(entry.lift, y)
    fams = entry.degenerate_families(y)
    assert len(fams) == 12  # one per (row, column) target pair
    for fam in fams[:4]:
        norms = []
        for i in (4, 8, 16, 32):
            v = fam.make(i)
            lv = pt.L @ (pt.basis.T @ v)
            norms.append(np.linalg.norm(lv))
            q = lc.qmap(entry.lift, y, v)
            assert np.linalg.norm(q - fam.q_limit) <= 1e-9
        ratios = [norms[k + 1] / norms[k] for k in range(3) if norms[k] > 1e-14]
        assert all(abs(rt - 0.5) <= 0.05 for rt in ratios) or all(n <= 1e-13 for n in norms)


def test_desing_degenerate_directions(rng):
    entry = cat.desing_chart(3, 3, 2)
    y = entry.sample_point("rank_deficient", rng)
    pt = lc.LiftPoint(entry.lift, y)
    for fam in entry.degenerate_families(y)[:3]:
        norms = []
        for i in (4, 8, 16, 32):
            v = fam.make(i)
            norms.append(np.linalg.norm(pt.L @ (pt.basis.T @ v)))
            q = lc.qmap(entry.lift, y, v)
            assert np.linalg.norm(q - fam.q_limit) <= 1e-9
        ratios = [norms[k + 1] / norms[k] for k in range(3) if norms[k] > 1e-14]
        assert all(abs(rt - 0.5) <= 0.05 for rt in ratios) or all(n <= 1e-13 for n in norms)


def test_degenerate_directions_full_rank_raises(rng):
    entry = cat.lr(3, 3, 2)
    y = entry.sample_point("full_rank", rng)
    with pytest.raises(NoDegeneracy):
        cat.degenerate_directions(entry, y, 4)


def test_pathological_desing(rng):
    entry = cat.desing_chart(3, 3, 2)
    y = entry.sample_point("rank_deficient", rng)
    x = lc.value(entry.lift, y)
    seq = cat.pathological_sequence(entry, y)
    for i in (4, 16, 64):
        xi = seq(i)
        assert entry.set_desc.residual(xi) <= 1e-9
        assert np.linalg.norm(xi - x) <= 1.0 / i + 1e-12
        assert entry.min_fiber_distance(xi, y, 50, rng) >= 0.1


def test_pathological_svd_repeated(rng):
    entry = cat.svd_lift(4, 3, 2)
    y = entry.sample_point("repeated", rng)
    x = lc.value(entry.lift, y)
    seq = cat.pathological_sequence(entry, y)
    for i in (4, 16, 64):
        xi = seq(i)
        assert entry.set_desc.residual(xi) <= 1e-9
        assert np.linalg.norm(xi - x) <= 1.0 / i + 1e-12
        assert entry.min_fiber_distance(xi, y, 300, rng) >= 0.1


def test_pathological_lr_unbalanced(rng):
    entry = cat.lr(4, 3, 2)
    y = entry.sample_point("unbalanced", rng)
    x = lc.value(entry.lift, y)
    seq = cat.pathological_sequence(entry, y)
    norms = []
    for i in (4, 16, 64):
        xi = seq(i)
        assert entry.set_desc.residual(xi) <= 1e-9
        norms.append(np.linalg.norm(xi - x))
        assert entry.min_fiber_distance(xi, y, 200, rng) >= 0.05
    assert norms[-1] < norms[0]


def test_pathological_nodal(rng):
    entry = cat.nodal_cubic()
    y = np.array([0.0, 0.0, 1.0])
    seq = cat.pathological_sequence(entry, y)
    for i in (4, 16, 64):
        xi = seq(i)
        assert entry.set_desc.residual(xi) <= 1e-10
        assert np.linalg.norm(xi) <= 1.0 / i
        assert entry.min_fiber_distance(xi, y, 10, rng) >= 0.5


def test_no_pathology_for_open_lifts(rng):
    entry = cat.hadamard(3)
    with pytest.raises(NoPathology):
        cat.pathological_sequence(entry, entry.sample_point("interior", rng))
    entry = cat.lr(3, 3, 2)
    with pytest.raises(NoPathology):
        cat.pathological_sequence(entry, entry.sample_point("balanced_deficient", rng))


def test_msvd_pathological_opposite(rng):
    entry = cat.msvd_lift(4, 3, 2)
    y = entry.sample_point("opposite_pair", rng)
    x = lc.value(entry.lift, y)
    seq = cat.pathological_sequence(entry, y)
    for i in (8, 32):
        xi = seq(i)
        assert entry.set_desc.residual(xi) <= 1e-9
        assert np.linalg.norm(xi - x) <= 1.2 / i
        assert entry.min_fiber_distance(xi, y, 300, rng) >= 0.1


def test_expected_verdicts_by_regime(rng):
    checks = [
        (cat.hadamard(4), "interior", {cat.ONE: True}),
        (cat.hadamard(4), "boundary", {cat.ONE: False, cat.TWO: True}),
        (cat.lr(4, 3, 2), "unbalanced", {cat.LOCAL: False, cat.ONE: False, cat.TWO: True}),
        (cat.lr(4, 3, 2), "balanced_deficient", {cat.LOCAL: True, cat.ONE: False}),
        (cat.desing_chart(3, 3, 2), "rank_deficient", {cat.LOCAL: False, cat.TWO: True}),
        (cat.svd_lift(4, 3, 2), "repeated", {cat.LOCAL: False, cat.ONE: False}),
        (cat.svd_lift(4, 3, 2), "distinct", {cat.LOCAL: True, cat.ONE: True}),
        (cat.msvd_lift(4, 3, 2), "opposite_pair", {cat.LOCAL: False}),
        (cat.disk_quartic(), "equator", {cat.LOCAL: True, cat.ONE: False, cat.TWO: False}),
        (cat.nodal_cubic(), "node", {cat.LOCAL: False, cat.ONE: False, cat.TWO: False}),
        (cat.ball(3), "boundary", {cat.ONE: False, cat.TWO: True}),
    ]
    for entry, regime, want in checks:
        for _ in range(5):
            y = entry.sample_point(regime, rng)
            got = entry.expected(y)
            for key, val in want.items():
                assert got[key] == val, f"{entry.entry_id}/{regime}/{key}"


def test_bm_rank_deficient_instance(rng):
    entry = cat.burer_monteiro(4, 2, 2, seed=9, anchor_rank=1)
    p = entry.sample_point("anchor", rng)
    R = p[16:].reshape(4, 2)
    assert nx.numerical_rank(R) == 1
    assert entry.expected(p)[cat.ONE] is False
    x = lc.value(entry.lift, p)
    assert entry.set_desc.residual(x) <= 1e-9
