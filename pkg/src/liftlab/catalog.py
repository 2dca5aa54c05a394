"""Concrete lifts, their downstairs sets, and their classified landscapes.

Each entry bundles a lift with the set it parametrizes, per-regime point
samplers, the classification of the three landscape properties where known
(missing keys mean the classification is open), and the constructive
ingredients the property checker consumes: closed-form decompositions into
the reachable-acceleration cone, degenerate-direction sequences whose
accelerations stay put while velocities die off, pathological downstairs
sequences that cannot be lifted, and fiber samplers.

Matrix-valued variables are flattened row-major. Stochastic matrices are laid
out column-by-column so the product structure over simplex columns is
contiguous.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import cones as cn
from . import lift_core as lc
from . import manifold as mf
from . import numerics as nx
from .errors import InvalidInput, NoDegeneracy, NoPathology

LOCAL = "local_to_local"
ONE = "one_implies_one"
TWO = "two_implies_one"


@dataclass
class DegenerateFamily:
    """One sequence v_i of tangents with L(v_i) -> 0 and Q(v_i) -> q_limit."""

    make: Callable[[int], np.ndarray]
    q_limit: np.ndarray


@dataclass
class CatalogEntry:
    entry_id: str
    params: dict
    lift: lc.Lift
    set_desc: object
    regimes: tuple
    sample_point: Callable
    expected_verdicts: Callable
    a_kernel_candidate: Optional[Callable] = None
    degenerate_families: Optional[Callable] = None
    pathological: Optional[Callable] = None
    min_fiber_distance: Optional[Callable] = None

    def expected(self, y):
        return self.expected_verdicts(np.asarray(y, dtype=float).reshape(-1))


def _rng_of(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _jacobian_from_directional(dim_in, dirderiv):
    cols = [np.asarray(dirderiv(e), dtype=float).reshape(-1) for e in np.eye(dim_in)]
    return np.array(cols).T


def _orthogonal(n, rng):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))


# ---------------------------------------------------------------------------
# Hadamard lift of the simplex (and friends)


def _hadamard_lift(n):
    man = mf.sphere(n)

    def phi(y):
        return y * y

    def dphi(y):
        return 2.0 * np.diag(y)

    def d2phi(y, v):
        return 2.0 * v * v

    return lc.Lift(man, n, phi, dphi, d2phi, name=f"hadamard({n})")


def _hadamard_sample(n, regime, rng, n_zeros=None):
    if regime == "interior":
        while True:
            y = rng.standard_normal(n)
            y /= np.linalg.norm(y)
            if np.min(np.abs(y)) >= 0.25 / np.sqrt(n):
                return y
    if regime == "boundary":
        k = n_zeros if n_zeros is not None else int(rng.integers(1, n - 1))
        while True:
            y = rng.standard_normal(n)
            idx = rng.permutation(n)[:k]
            y[idx] = 0.0
            nrm = np.linalg.norm(y)
            if nrm > 0.1:
                y /= nrm
                live = np.delete(np.abs(y), idx)
                if live.size == 0 or np.min(live) >= 0.2 / np.sqrt(n):
                    return y
    raise InvalidInput(f"unknown regime {regime!r}")


def _hadamard_kernel_candidate(n, zero_tol=1e-8):
    def hook(pt, d):
        y = pt.y
        zeros = np.abs(y) <= zero_tol
        v = np.zeros(n)
        dz = d[zeros]
        if np.any(dz < -1e-7):
            return None
        v[zeros] = np.sqrt(np.clip(dz, 0.0, None) / 2.0)
        return v

    return hook


def hadamard(n):
    if n < 2:
        raise InvalidInput("hadamard needs n >= 2")
    lift = _hadamard_lift(n)

    def expected(y):
        interior = bool(np.min(np.abs(y)) > 1e-8)
        return {LOCAL: True, ONE: interior, TWO: True}

    def min_fiber_distance(x, y, k, rng):
        # fibers are sign flips of the entrywise square root
        root = np.sqrt(np.clip(x, 0.0, None))
        best = np.inf
        for _ in range(k):
            signs = rng.choice([-1.0, 1.0], size=n)
            best = min(best, float(np.linalg.norm(signs * root - y)))
        return best

    return CatalogEntry(
        entry_id=f"hadamard({n})",
        params={"n": n},
        lift=lift,
        set_desc=cn.Simplex(n),
        regimes=("interior", "boundary"),
        sample_point=lambda regime, rng: _hadamard_sample(n, regime, _rng_of(rng)),
        expected_verdicts=expected,
        a_kernel_candidate=_hadamard_kernel_candidate(n),
        min_fiber_distance=min_fiber_distance,
    )


def hadprod(n, m):
    base = [_hadamard_lift(n) for _ in range(m)]
    lift = lc.product(base)
    hook1 = _hadamard_kernel_candidate(n)

    def expected(y):
        interior = bool(np.min(np.abs(y)) > 1e-8)
        return {LOCAL: True, ONE: interior, TWO: True}

    def sample(regime, rng):
        rng = _rng_of(rng)
        if regime == "boundary":
            # at least one factor touches the boundary of its simplex
            parts = [_hadamard_sample(n, "boundary", rng, n_zeros=1)]
            parts += [_hadamard_sample(n, rng.choice(["interior", "boundary"]), rng) for _ in range(m - 1)]
            return np.concatenate(parts)
        return np.concatenate([_hadamard_sample(n, "interior", rng) for _ in range(m)])

    def hook(pt, d):
        out = np.zeros(n * m)
        for j in range(m):
            sl = slice(j * n, (j + 1) * n)
            sub = _FactorView(pt.y[sl])
            v = hook1(sub, d[sl])
            if v is None:
                return None
            out[sl] = v
        return out

    return CatalogEntry(
        entry_id=f"hadprod({n},{m})",
        params={"n": n, "m": m},
        lift=lift,
        set_desc=cn.stochastic_matrices(n, m),
        regimes=("interior", "boundary"),
        sample_point=sample,
        expected_verdicts=expected,
        a_kernel_candidate=hook,
    )


class _FactorView:
    """Minimal stand-in exposing .y for per-factor kernel hooks."""

    def __init__(self, y):
        self.y = y


def eigen_simplex(n, seed=0):
    rng = _rng_of(seed)
    U = _orthogonal(n, rng)
    man = mf.sphere(n)

    def phi(y):
        z = U.T @ y
        return z * z

    def dphi(y):
        return 2.0 * np.diag(U.T @ y) @ U.T

    def d2phi(y, v):
        z = U.T @ v
        return 2.0 * z * z

    lift = lc.Lift(man, n, phi, dphi, d2phi, name=f"eigen_simplex({n})")
    hook1 = _hadamard_kernel_candidate(n)

    def expected(y):
        z = U.T @ y
        return {LOCAL: True, ONE: bool(np.min(np.abs(z)) > 1e-8), TWO: True}

    def sample(regime, rng):
        z = _hadamard_sample(n, regime, _rng_of(rng))
        return U @ z

    def hook(pt, d):
        v = hook1(_FactorView(U.T @ pt.y), d)
        return None if v is None else U @ v

    return CatalogEntry(
        entry_id=f"eigen_simplex({n})",
        params={"n": n, "seed": seed, "U": U},
        lift=lift,
        set_desc=cn.Simplex(n),
        regimes=("interior", "boundary"),
        sample_point=sample,
        expected_verdicts=expected,
        a_kernel_candidate=hook,
    )


# ---------------------------------------------------------------------------
# fiber products onto the ball and the annulus


def ball(n):
    fmap = lc.AmbientMap(
        n, 1,
        value=lambda x: np.array([1.0 - x @ x]),
        jac=lambda x: -2.0 * x[None, :],
        d2=lambda x, v: np.array([-2.0 * (v @ v)]),
        name="one_minus_norm_sq",
    )
    square = lc.Lift(
        mf.ChartDomain(1), 1,
        phi=lambda y: y * y,
        dphi=lambda y: 2.0 * y[None, :],
        d2phi=lambda y, v: 2.0 * v * v,
        name="square",
    )

    def sampler(rng):
        z = rng.standard_normal(n + 1)
        return z / np.linalg.norm(z)

    lift = lc.fiber_product(fmap, square, name=f"ball({n})", sampler=sampler)

    def expected(p):
        return {LOCAL: True, ONE: bool(abs(p[n]) > 1e-8), TWO: True}

    def sample(regime, rng):
        rng = _rng_of(rng)
        g = rng.standard_normal(n)
        g /= np.linalg.norm(g)
        if regime == "boundary":
            return np.concatenate([g, [0.0]])
        rho = rng.uniform(0.1, 0.9)
        return np.concatenate([rho * g, [np.sqrt(1.0 - rho * rho) * rng.choice([-1.0, 1.0])]])

    def hook(pt, d):
        x = pt.y[:n]
        yv = pt.y[n]
        v = np.zeros(n + 1)
        if abs(yv) > 1e-8:
            return v  # interior: everything already lies in im L
        c = -float(x @ d)
        if c < -1e-7:
            return None
        v[n] = np.sqrt(max(c, 0.0))
        return v

    return CatalogEntry(
        entry_id=f"ball({n})",
        params={"n": n},
        lift=lift,
        set_desc=cn.Ball(n),
        regimes=("interior", "boundary"),
        sample_point=sample,
        expected_verdicts=expected,
        a_kernel_candidate=hook,
    )


def annulus(n, r1, r2):
    if not (0 < r1 < r2):
        raise InvalidInput("annulus needs 0 < r1 < r2")
    fmap = lc.AmbientMap(
        n, 2,
        value=lambda x: np.array([x @ x - r1 * r1, r2 * r2 - x @ x]),
        jac=lambda x: np.vstack([2.0 * x, -2.0 * x]),
        d2=lambda x, v: np.array([2.0 * (v @ v), -2.0 * (v @ v)]),
        name="annulus_radii",
    )
    squares = lc.Lift(
        mf.ChartDomain(2), 2,
        phi=lambda y: y * y,
        dphi=lambda y: 2.0 * np.diag(y),
        d2phi=lambda y, v: 2.0 * v * v,
        name="squares",
    )

    def sampler(rng):
        g = rng.standard_normal(n)
        g /= np.linalg.norm(g)
        rho = rng.uniform(r1, r2)
        y1 = np.sqrt(rho * rho - r1 * r1) * rng.choice([-1.0, 1.0])
        y2 = np.sqrt(r2 * r2 - rho * rho) * rng.choice([-1.0, 1.0])
        return np.concatenate([rho * g, [y1, y2]])

    lift = lc.fiber_product(fmap, squares, name=f"annulus({n})", sampler=sampler)

    def expected(p):
        return {LOCAL: True, ONE: bool(min(abs(p[n]), abs(p[n + 1])) > 1e-8), TWO: True}

    def sample(regime, rng):
        rng = _rng_of(rng)
        g = rng.standard_normal(n)
        g /= np.linalg.norm(g)
        if regime == "inner_boundary":
            rho = r1
        elif regime == "outer_boundary":
            rho = r2
        else:
            rho = rng.uniform(r1 + 0.15 * (r2 - r1), r2 - 0.15 * (r2 - r1))
        y1 = np.sqrt(max(rho * rho - r1 * r1, 0.0)) * rng.choice([-1.0, 1.0])
        y2 = np.sqrt(max(r2 * r2 - rho * rho, 0.0)) * rng.choice([-1.0, 1.0])
        return np.concatenate([rho * g, [y1, y2]])

    def hook(pt, d):
        x = pt.y[:n]
        y1, y2 = pt.y[n], pt.y[n + 1]
        v = np.zeros(n + 2)
        c = float(x @ d)
        if abs(y1) <= 1e-8:
            if c < -1e-7:
                return None
            v[n] = np.sqrt(max(c, 0.0))
        if abs(y2) <= 1e-8:
            if c > 1e-7:
                return None
            v[n + 1] = np.sqrt(max(-c, 0.0))
        return v

    return CatalogEntry(
        entry_id=f"annulus({n},{r1},{r2})",
        params={"n": n, "r1": r1, "r2": r2},
        lift=lift,
        set_desc=cn.Annulus(n, r1, r2),
        regimes=("interior", "inner_boundary", "outer_boundary"),
        sample_point=sample,
        expected_verdicts=expected,
        a_kernel_candidate=hook,
    )


# ---------------------------------------------------------------------------
# PSD factorization lifts


def _psd_phi_maps(n, r):
    def phi_mat(R):
        return R @ R.T

    def dphi_mat(R, V):
        return R @ V.T + V @ R.T

    def d2phi_mat(V):
        return 2.0 * V @ V.T

    return phi_mat, dphi_mat, d2phi_mat


def _psd_kernel_direction(R, D, r, tol=nx.DEFAULT_TOL):
    """Kernel tangent V with 2 V V' equal to the corner block of D, per the
    rescaled-Cholesky-and-rotate recipe; None when the block is not PSD of
    admissible rank."""
    n = R.shape[0]
    U1 = nx.range_basis(R, tol)
    s = U1.shape[1]
    P_perp = np.eye(n) - U1 @ U1.T
    V3 = P_perp @ _sym(D) @ P_perp
    mu, E = np.linalg.eigh(_sym(V3))
    if mu.size and mu[0] < -1e-6 * max(1.0, abs(mu[-1])):
        return None
    order = np.argsort(mu)[::-1]
    keep = [i for i in order[: max(r - s, 0)] if mu[i] > 1e-12]
    k = len(keep)
    if k == 0:
        return np.zeros((n, r))
    R0 = np.zeros((n, r))
    R0[:, :k] = E[:, keep] * np.sqrt(mu[keep] / 2.0)
    W1 = nx.range_basis(R.T, tol)  # basis of col(R') in R^r, dim s
    K = nx.kernel_basis(R0)  # kernel of R0 as a map R^r -> R^n
    if K.shape[1] < W1.shape[1]:
        return None
    K1 = K[:, : W1.shape[1]]
    K1_comp = nx.kernel_basis(K1.T)
    W2 = nx.kernel_basis(W1.T)
    Q = np.hstack([K1, K1_comp]) @ np.hstack([W1, W2]).T
    return R0 @ Q


def _sym(a):
    return 0.5 * (a + a.T)


def psd_lowrank(n, r):
    if not (1 <= r < n):
        raise InvalidInput("psd_lowrank needs 1 <= r < n")
    man = mf.ChartDomain(n * r)
    phi_mat, dphi_mat, d2phi_mat = _psd_phi_maps(n, r)

    def phi(y):
        return phi_mat(y.reshape(n, r)).reshape(-1)

    def dphi(y):
        R = y.reshape(n, r)
        return _jacobian_from_directional(n * r, lambda e: dphi_mat(R, e.reshape(n, r)))

    def d2phi(y, v):
        return d2phi_mat(v.reshape(n, r)).reshape(-1)

    lift = lc.Lift(man, n * n, phi, dphi, d2phi, name=f"psd_lowrank({n},{r})")

    def expected(y):
        s = nx.numerical_rank(y.reshape(n, r))
        return {LOCAL: True, ONE: bool(s == r), TWO: True}

    def sample(regime, rng):
        rng = _rng_of(rng)
        if regime == "rank_deficient":
            s = r - 1 if r > 1 else 0
            if s == 0:
                return np.zeros(n * r)
            B = rng.standard_normal((n, s))
            C = rng.standard_normal((s, r))
            return (B @ C).reshape(-1)
        return rng.standard_normal(n * r)

    def hook(pt, d):
        R = pt.y.reshape(n, r)
        V = _psd_kernel_direction(R, d.reshape(n, n), r)
        return None if V is None else V.reshape(-1)

    def min_fiber_distance(x, y, k, rng):
        X = _sym(x.reshape(n, n))
        mu, E = np.linalg.eigh(X)
        order = np.argsort(mu)[::-1][:r]
        R0 = E[:, order] * np.sqrt(np.clip(mu[order], 0.0, None))
        best = np.inf
        for _ in range(k):
            Q = _orthogonal(r, rng)
            best = min(best, float(np.linalg.norm((R0 @ Q).reshape(-1) - y)))
        return best

    return CatalogEntry(
        entry_id=f"psd_lowrank({n},{r})",
        params={"n": n, "r": r},
        lift=lift,
        set_desc=cn.PsdBoundedRank(n, r),
        regimes=("full_rank", "rank_deficient"),
        sample_point=sample,
        expected_verdicts=expected,
        a_kernel_candidate=hook,
        min_fiber_distance=min_fiber_distance,
    )


def burer_monteiro(n, r, m, seed=0, anchor_rank=None):
    """Rank-constrained SDP feasible set lifted through the factorization map.

    Constraint data is generated around a feasible anchor factor of the
    requested rank; the constant-rank hypothesis is spot-checked numerically.
    """
    if not (1 <= r < n):
        raise InvalidInput("burer_monteiro needs 1 <= r < n")
    anchor_rank = r if anchor_rank is None else anchor_rank
    if not (1 <= anchor_rank <= r):
        raise InvalidInput("anchor rank must lie in [1, r]")
    rng = _rng_of(seed)
    for _ in range(50):
        A_list = tuple(_sym(rng.standard_normal((n, n))) for _ in range(m))
        R0 = np.zeros((n, r))
        R0[:, :anchor_rank] = rng.standard_normal((n, anchor_rank))
        rows = np.array([(2.0 * (A @ R0)).reshape(-1) for A in A_list])
        if nx.numerical_rank(rows) == m:
            break
    else:
        raise InvalidInput("could not generate a constant-rank instance")
    b_list = tuple(float(np.sum((A @ R0) * R0)) for A in A_list)

    phi_mat, dphi_mat, d2phi_mat = _psd_phi_maps(n, r)
    psi = lc.Lift(
        mf.ChartDomain(n * r), n * n + m,
        phi=lambda y: np.concatenate([phi_mat(y.reshape(n, r)).reshape(-1), np.zeros(m)]),
        dphi=lambda y: np.vstack([
            _jacobian_from_directional(n * r, lambda e: dphi_mat(y.reshape(n, r), e.reshape(n, r))),
            np.zeros((m, n * r)),
        ]),
        d2phi=lambda y, v: np.concatenate([d2phi_mat(v.reshape(n, r)).reshape(-1), np.zeros(m)]),
        name="bm_factor",
    )
    A_rows = np.array([A.reshape(-1) for A in A_list])
    fmap = lc.AmbientMap(
        n * n, n * n + m,
        value=lambda x: np.concatenate([x, A_rows @ x - np.array(b_list)]),
        jac=lambda x: np.vstack([np.eye(n * n), A_rows]),
        d2=lambda x, v: np.zeros(n * n + m),
        name="identity_and_traces",
    )
    lift = lc.fiber_product(fmap, psi, name=f"burer_monteiro({n},{r},{m})")
    set_desc = cn.SmoothSdpSlice(A_list, b_list, n, r)

    def project_factor(R, rank):
        X = R[:, :rank]
        for _ in range(80):
            h = np.array([np.sum((A @ X) * X) - b for A, b in zip(A_list, b_list)])
            if np.max(np.abs(h)) <= 1e-13:
                break
            J = np.array([(2.0 * (A @ X)).reshape(-1) for A in A_list])
            X = X - nx.min_norm_solve(J, h).reshape(X.shape)
        out = np.zeros((n, r))
        out[:, :rank] = X
        return out

    def pack(R):
        return np.concatenate([(R @ R.T).reshape(-1), R.reshape(-1)])

    def sample(regime, rng):
        rng = _rng_of(rng)
        base = R0[:, :anchor_rank]
        for _ in range(60):
            R = project_factor(base + 0.25 * rng.standard_normal((n, anchor_rank)), anchor_rank)
            feas = np.max(np.abs([np.sum((A @ R) * R) - b for A, b in zip(A_list, b_list)]))
            if nx.numerical_rank(R) == anchor_rank and feas <= 1e-11:
                return pack(R)
        raise InvalidInput("could not sample a feasible factor")

    def expected(p):
        R = p[n * n:].reshape(n, r)
        return {LOCAL: True, ONE: bool(nx.numerical_rank(R) == r), TWO: True}

    def hook(pt, d):
        R = pt.y[n * n:].reshape(n, r)
        V = _psd_kernel_direction(R, d.reshape(n, n), r)
        if V is None:
            return None
        return np.concatenate([np.zeros(n * n), V.reshape(-1)])

    return CatalogEntry(
        entry_id=f"burer_monteiro({n},{r},{m};rank{anchor_rank})",
        params={"n": n, "r": r, "m": m, "seed": seed, "anchor_rank": anchor_rank,
                "A_list": A_list, "b_list": b_list, "R0": R0},
        lift=lift,
        set_desc=set_desc,
        regimes=("anchor",),
        sample_point=sample,
        expected_verdicts=expected,
        a_kernel_candidate=hook,
    )


# ---------------------------------------------------------------------------
# bounded-rank matrix lifts


def lr(m, n, r):
    if not (1 <= r < min(m, n)):
        raise InvalidInput("lr needs 1 <= r < min(m, n)")
    man = mf.ChartDomain(m * r + n * r)

    def unpack(y):
        return y[: m * r].reshape(m, r), y[m * r:].reshape(n, r)

    def phi(y):
        L, R = unpack(y)
        return (L @ R.T).reshape(-1)

    def dphi(y):
        L, R = unpack(y)

        def dd(e):
            Ld, Rd = unpack(e)
            return Ld @ R.T + L @ Rd.T

        return _jacobian_from_directional(m * r + n * r, dd)

    def d2phi(y, v):
        Ld, Rd = unpack(v)
        return (2.0 * Ld @ Rd.T).reshape(-1)

    lift = lc.Lift(man, m * n, phi, dphi, d2phi, name=f"lr({m},{n},{r})")

    def ranks(y):
        L, R = unpack(y)
        return nx.numerical_rank(L), nx.numerical_rank(R), nx.numerical_rank(L @ R.T)

    def expected(y):
        rl, rr, rx = ranks(y)
        return {LOCAL: bool(rl == rr == rx), ONE: bool(rl == r and rr == r), TWO: True}

    def sample(regime, rng):
        rng = _rng_of(rng)
        if regime == "full_rank":
            return rng.standard_normal(m * r + n * r)
        s = max(r - 1, 1) if regime != "rank_zero" else 0
        if regime == "balanced_deficient":
            C = rng.standard_normal((s, r))
            L = rng.standard_normal((m, s)) @ C
            R = rng.standard_normal((n, s)) @ C
            return np.concatenate([L.reshape(-1), R.reshape(-1)])
        if regime == "unbalanced":
            L = rng.standard_normal((m, r))
            R = rng.standard_normal((n, s)) @ rng.standard_normal((s, r))
            return np.concatenate([L.reshape(-1), R.reshape(-1)])
        raise InvalidInput(f"unknown regime {regime!r}")

    def degenerate_families(y):
        L, R = unpack(y)
        if nx.numerical_rank(L @ R.T) == r:
            raise NoDegeneracy("factors have full product rank")
        kerL = nx.kernel_basis(L)
        kerR = nx.kernel_basis(R)
        families = []
        for a in range(m):
            for b in range(n):
                u = np.eye(m)[a]
                v = np.eye(n)[b]
                if kerL.shape[1]:
                    w = kerL[:, 0]
                    families.append(DegenerateFamily(
                        make=(lambda u=u, v=v, w=w: lambda i: np.concatenate([
                            (np.outer(u, w) / i).reshape(-1),
                            (np.outer(v, w) * (i / 2.0)).reshape(-1)]))(),
                        q_limit=np.outer(u, v).reshape(-1),
                    ))
                elif kerR.shape[1]:
                    w = kerR[:, 0]
                    families.append(DegenerateFamily(
                        make=(lambda u=u, v=v, w=w: lambda i: np.concatenate([
                            (np.outer(u, w) * (i / 2.0)).reshape(-1),
                            (np.outer(v, w) / i).reshape(-1)]))(),
                        q_limit=np.outer(u, v).reshape(-1),
                    ))
        if not families:
            raise NoDegeneracy("no kernel vector available")
        return families

    def pathological(y):
        L, R = unpack(y)
        rl, rr, rx = ranks(y)
        if rl == rr == rx:
            raise NoPathology("balanced point; the lift is open here")
        X = L @ R.T
        Ucol = nx.range_basis(X)
        Vcol = nx.range_basis(X.T)
        s = Ucol.shape[1]

        def perp_factor(F, col_basis, dim):
            # first column outside col(F), rest in col(X)^perp, remaining zero
            out = np.zeros((dim, r))
            comp_F = nx.kernel_basis(nx.range_basis(F).T)
            v1 = comp_F[:, 0]
            out[:, 0] = v1
            comp_X = nx.kernel_basis(np.hstack([col_basis, v1[:, None]]).T)
            need = r - s - 1
            out[:, 1:1 + need] = comp_X[:, :need]
            return out

        Lp = perp_factor(L, Ucol, m)
        Rp = perp_factor(R, Vcol, n)
        L_base = Ucol @ (Ucol.T @ L)
        R_base = Vcol @ (Vcol.T @ R)

        def x_i(i):
            Li = L_base + Lp / i
            Ri = R_base + Rp / i
            return (Li @ Ri.T).reshape(-1)

        return x_i

    def min_fiber_distance(x, y, k, rng):
        X = x.reshape(m, n)
        u, s, vh = np.linalg.svd(X, full_matrices=False)
        L0 = u[:, :r] * np.sqrt(s[:r])
        R0 = vh[:r].T * np.sqrt(s[:r])
        best = np.inf
        for _ in range(k):
            J = rng.standard_normal((r, r))
            if abs(np.linalg.det(J)) < 1e-3:
                continue
            cand = np.concatenate([(L0 @ J).reshape(-1), (R0 @ np.linalg.inv(J).T).reshape(-1)])
            best = min(best, float(np.linalg.norm(cand - y)))
        return best

    return CatalogEntry(
        entry_id=f"lr({m},{n},{r})",
        params={"m": m, "n": n, "r": r},
        lift=lift,
        set_desc=cn.BoundedRank(m, n, r),
        regimes=("full_rank", "balanced_deficient", "unbalanced"),
        sample_point=sample,
        expected_verdicts=expected,
        degenerate_families=degenerate_families,
        pathological=pathological,
        min_fiber_distance=min_fiber_distance,
    )


def desing_chart(m, n, r, perm=None):
    """Chart of the kernel-desingularization of bounded-rank matrices.

    Points are (Z, W) mapping to [-Z W, Z] Pi; the appended subspace is the
    column span of Pi' [I; W], and verdicts transfer from the chart to the
    abstract lift because charts are submersions.
    """
    if not (1 <= r < min(m, n)):
        raise InvalidInput("desing_chart needs 1 <= r < min(m, n)")
    perm = np.arange(n) if perm is None else np.asarray(perm, dtype=int)
    Pi = np.eye(n)[perm]
    man = mf.ChartDomain(m * r + r * (n - r))

    def unpack(y):
        return y[: m * r].reshape(m, r), y[m * r:].reshape(r, n - r)

    def assemble(ZW_block, Z_block):
        return np.hstack([ZW_block, Z_block]) @ Pi

    def phi(y):
        Z, W = unpack(y)
        return assemble(-Z @ W, Z).reshape(-1)

    def dphi(y):
        Z, W = unpack(y)

        def dd(e):
            Zd, Wd = unpack(e)
            return assemble(-Zd @ W - Z @ Wd, Zd)

        return _jacobian_from_directional(m * r + r * (n - r), dd)

    def d2phi(y, v):
        Zd, Wd = unpack(v)
        return assemble(-2.0 * Zd @ Wd, np.zeros((m, r))).reshape(-1)

    lift = lc.Lift(man, m * n, phi, dphi, d2phi, name=f"desing_chart({m},{n},{r})")

    def expected(y):
        Z, _ = unpack(y)
        full = bool(nx.numerical_rank(Z) == r)
        return {LOCAL: full, ONE: full, TWO: True}

    def sample(regime, rng):
        rng = _rng_of(rng)
        W = rng.standard_normal((r, n - r))
        if regime == "full_rank":
            Z = rng.standard_normal((m, r))
        else:
            s = max(r - 1, 0)
            Z = rng.standard_normal((m, s)) @ rng.standard_normal((s, r)) if s else np.zeros((m, r))
        return np.concatenate([Z.reshape(-1), W.reshape(-1)])

    def degenerate_families(y):
        Z, W = unpack(y)
        if nx.numerical_rank(Z) == r:
            raise NoDegeneracy("chart factor has full rank")
        w = nx.kernel_basis(Z)[:, 0]
        families = []
        for a in range(m):
            for b in range(n - r):
                u = np.eye(m)[a]
                v = np.eye(n - r)[b]
                families.append(DegenerateFamily(
                    make=(lambda u=u, v=v, w=w: lambda i: np.concatenate([
                        (np.outer(u, w) / i).reshape(-1),
                        (np.outer(w, v) * float(i)).reshape(-1)]))(),
                    q_limit=assemble(-2.0 * np.outer(u, v), np.zeros((m, r))).reshape(-1),
                ))
        return families

    def subspace_basis(y):
        _, W = unpack(y)
        return nx.range_basis(Pi.T @ np.vstack([np.eye(n - r), W]))

    def pathological(y):
        Z, W = unpack(y)
        if nx.numerical_rank(Z) == r:
            raise NoPathology("full-rank point; the lift is open here")
        X = assemble(-Z @ W, Z)
        S = subspace_basis(y)
        Ucol = nx.range_basis(X)
        Vcol = nx.range_basis(X.T)
        s = Ucol.shape[1]
        k = r - s
        U_perp = nx.kernel_basis(Ucol.T)[:, :k]
        first = S[:, :1]
        rest = nx.kernel_basis(np.hstack([Vcol, first]).T)[:, : k - 1]
        V_perp = np.hstack([first, rest])

        def x_i(i):
            return (X + (U_perp @ V_perp.T) / i).reshape(-1)

        return x_i

    def min_fiber_distance(x, y, k, rng):
        # rank-r matrices have a unique lift (X_i, ker X_i); measure the
        # chart-free distance ||X_i - X|| plus the kernel-subspace gap
        X_i = x.reshape(m, n)
        Z, W = unpack(y)
        X = assemble(-Z @ W, Z)
        S = subspace_basis(y)
        ker_i = nx.kernel_basis(X_i)
        return float(np.linalg.norm(X_i - X) + nx.subspace_distance(ker_i, S))

    return CatalogEntry(
        entry_id=f"desing_chart({m},{n},{r})",
        params={"m": m, "n": n, "r": r, "perm": perm},
        lift=lift,
        set_desc=cn.BoundedRank(m, n, r),
        regimes=("full_rank", "rank_deficient"),
        sample_point=sample,
        expected_verdicts=expected,
        degenerate_families=degenerate_families,
        pathological=pathological,
        min_fiber_distance=min_fiber_distance,
    )


# ---------------------------------------------------------------------------
# SVD-style lifts


def _signed(x):
    s = np.sign(x)
    s[s == 0] = 1.0
    return s


def svd_lift(m, n, r):
    if not (r < min(m, n)):
        raise InvalidInput("svd lift needs r < min(m, n)")
    man = mf.Product((mf.stiefel(m, r), mf.ChartDomain(r), mf.stiefel(n, r)))

    def unpack(y):
        U = y[: m * r].reshape(m, r)
        sig = y[m * r: m * r + r]
        V = y[m * r + r:].reshape(n, r)
        return U, sig, V

    def phi(y):
        U, sig, V = unpack(y)
        return (U @ np.diag(sig) @ V.T).reshape(-1)

    def dphi(y):
        U, sig, V = unpack(y)

        def dd(e):
            Ud, sd, Vd = unpack(e)
            return Ud @ np.diag(sig) @ V.T + U @ np.diag(sd) @ V.T + U @ np.diag(sig) @ Vd.T

        return _jacobian_from_directional(m * r + r + n * r, dd)

    def d2phi(y, v):
        U, sig, V = unpack(y)
        Ud, sd, Vd = unpack(v)
        out = Ud @ np.diag(sd) @ V.T + Ud @ np.diag(sig) @ Vd.T + U @ np.diag(sd) @ Vd.T
        return (2.0 * out).reshape(-1)

    lift = lc.Lift(man, m * n, phi, dphi, d2phi, name=f"svd({m},{n},{r})")

    def classify(sig, tol=1e-8):
        mags = np.abs(sig)
        if np.min(mags) <= tol:
            return "zero"
        gaps = np.abs(mags[:, None] - mags[None, :]) + np.eye(r)
        return "repeated" if np.min(gaps) <= tol else "distinct"

    def expected(y):
        _, sig, _ = unpack(y)
        good = classify(sig) == "distinct"
        return {LOCAL: good, ONE: good}

    def _draw_sigma(rng):
        mags = 0.4 + 0.35 * np.arange(r) + 0.05 * rng.random(r)
        return rng.permutation(mags) * rng.choice([-1.0, 1.0], size=r)

    def sample(regime, rng):
        rng = _rng_of(rng)
        U = mf.random_point(mf.stiefel(m, r), rng).reshape(m, r)
        V = mf.random_point(mf.stiefel(n, r), rng).reshape(n, r)
        sig = _draw_sigma(rng)
        if regime == "repeated":
            k, l = sorted(rng.permutation(r)[:2]) if r > 1 else (0, 0)
            if r == 1:
                raise InvalidInput("repeated regime needs r >= 2")
            sig[l] = sig[k] * rng.choice([-1.0, 1.0])
        elif regime == "zero":
            sig[int(rng.integers(r))] = 0.0
        return np.concatenate([U.reshape(-1), sig, V.reshape(-1)])

    def pathological(y):
        U, sig, V = unpack(y)
        kind = classify(sig)
        if kind == "distinct":
            raise NoPathology("distinct nonzero magnitudes; the lift is open here")
        delta = 0.9 * (np.arange(r) + 1.0) / np.linalg.norm(np.arange(r) + 1.0)
        if kind == "repeated":
            mags = np.abs(sig)
            ks, ls = np.nonzero(np.triu(np.abs(mags[:, None] - mags[None, :]) <= 1e-8, 1))
            k, l = int(ks[0]), int(ls[0])
            Q = np.eye(r)
            c = 1.0 / np.sqrt(2.0)
            Q[k, k] = Q[l, l] = c
            Q[l, k] = c
            Q[k, l] = -c
            D = np.diag(_signed(sig))
            Ukl = U @ D @ Q @ D
            Vkl = V @ Q

            def x_i(i):
                return (Ukl @ np.diag(sig + delta / i) @ Vkl.T).reshape(-1)

            return x_i
        k = int(np.argmin(np.abs(sig)))
        uk = nx.kernel_basis(U.T)[:, 0]
        vk = nx.kernel_basis(V.T)[:, 0]
        Uk = U.copy()
        Vk = V.copy()
        Uk[:, k] = uk
        Vk[:, k] = vk

        def x_i(i):
            return (Uk @ np.diag(sig + delta / i) @ Vk.T).reshape(-1)

        return x_i

    def min_fiber_distance(x, y, k, rng):
        X = x.reshape(m, n)
        Ub, sb, Vb = np.linalg.svd(X, full_matrices=False)
        Ub, sb, Vb = Ub[:, :r], sb[:r], Vb[:r].T
        best = np.inf
        for _ in range(k):
            pi = rng.permutation(r)
            a = rng.choice([-1.0, 1.0], size=r)
            b = rng.choice([-1.0, 1.0], size=r)
            Uc = Ub[:, pi] * a
            Vc = Vb[:, pi] * b
            sc = sb[pi] * a * b
            cand = np.concatenate([Uc.reshape(-1), sc, Vc.reshape(-1)])
            best = min(best, float(np.linalg.norm(cand - y)))
        return best

    return CatalogEntry(
        entry_id=f"svd({m},{n},{r})",
        params={"m": m, "n": n, "r": r},
        lift=lift,
        set_desc=cn.BoundedRank(m, n, r),
        regimes=("distinct", "repeated", "zero"),
        sample_point=sample,
        expected_verdicts=expected,
        pathological=pathological,
        min_fiber_distance=min_fiber_distance,
    )


def _sym_basis(r):
    out = []
    for i in range(r):
        for j in range(i, r):
            E = np.zeros((r, r))
            if i == j:
                E[i, i] = 1.0
            else:
                E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
            out.append(E)
    return out


def msvd_lift(m, n, r):
    if not (r < min(m, n)):
        raise InvalidInput("msvd lift needs r < min(m, n)")
    basis = _sym_basis(r)
    k_sym = len(basis)
    man = mf.Product((mf.stiefel(m, r), mf.ChartDomain(k_sym), mf.stiefel(n, r)))

    def to_sym(c):
        return sum(ci * B for ci, B in zip(c, basis))

    def from_sym(M):
        return np.array([np.sum(M * B) for B in basis])

    def unpack(y):
        U = y[: m * r].reshape(m, r)
        M = to_sym(y[m * r: m * r + k_sym])
        V = y[m * r + k_sym:].reshape(n, r)
        return U, M, V

    def phi(y):
        U, M, V = unpack(y)
        return (U @ M @ V.T).reshape(-1)

    def dphi(y):
        U, M, V = unpack(y)

        def dd(e):
            Ud, Md, Vd = unpack(e)
            return Ud @ M @ V.T + U @ Md @ V.T + U @ M @ Vd.T

        return _jacobian_from_directional(m * r + k_sym + n * r, dd)

    def d2phi(y, v):
        U, M, V = unpack(y)
        Ud, Md, Vd = unpack(v)
        return (2.0 * (Ud @ Md @ V.T + Ud @ M @ Vd.T + U @ Md @ Vd.T)).reshape(-1)

    lift = lc.Lift(man, m * n, phi, dphi, d2phi, name=f"msvd({m},{n},{r})")

    def expected(y):
        _, M, _ = unpack(y)
        lam = np.linalg.eigvalsh(M)
        good = bool(np.min(np.abs(lam[:, None] + lam[None, :])) > 1e-8)
        return {LOCAL: good, ONE: good}

    def sample(regime, rng):
        rng = _rng_of(rng)
        U = mf.random_point(mf.stiefel(m, r), rng).reshape(m, r)
        V = mf.random_point(mf.stiefel(n, r), rng).reshape(n, r)
        W = _orthogonal(r, rng)
        lam = (0.5 + 0.4 * np.arange(r) + 0.05 * rng.random(r)) * rng.choice([-1.0, 1.0], size=r)
        if regime == "opposite_pair":
            if r < 2:
                raise InvalidInput("opposite_pair regime needs r >= 2")
            lam[1] = -lam[0]
        elif regime == "singular":
            lam[int(rng.integers(r))] = 0.0
        M = W @ np.diag(lam) @ W.T
        return np.concatenate([U.reshape(-1), from_sym(M), V.reshape(-1)])

    def pathological(y):
        U, M, V = unpack(y)
        lam, W = np.linalg.eigh(M)
        pair = None
        for i in range(r):
            for j in range(i + 1, r):
                if abs(lam[i] + lam[j]) <= 1e-8 and min(abs(lam[i]), abs(lam[j])) > 1e-8:
                    pair = (i, j)
        zero = [i for i in range(r) if abs(lam[i]) <= 1e-8]
        delta = 0.8 * (np.arange(r) + 1.0) / np.linalg.norm(np.arange(r) + 1.0)
        if pair is not None:
            kk, ll = pair
            T = np.eye(r)
            T[[kk, ll]] = T[[ll, kk]]
            S = np.eye(r)
            S[kk, kk] = S[ll, ll] = -1.0
            Ukl = U @ W @ T @ S @ W.T
            Vkl = V @ W @ T @ W.T

            def x_i(i):
                Mi = M + W @ np.diag(delta / i) @ W.T
                return (Ukl @ Mi @ Vkl.T).reshape(-1)

            return x_i
        if zero:
            kk = zero[0]
            uw = (U @ W)[:, kk]
            vw = (V @ W)[:, kk]
            up = nx.kernel_basis(U.T)[:, 0]
            vp = nx.kernel_basis(V.T)[:, 0]
            Y = _rotation_sending(uw, up, m)
            Z = _rotation_sending(vw, vp, n)

            def x_i(i):
                Mi = M + W @ np.diag(delta / i) @ W.T
                return ((Y @ U) @ Mi @ (Z @ V).T).reshape(-1)

            return x_i
        raise NoPathology("spectrum has no vanishing pairwise sums")

    def min_fiber_distance(x, y, k, rng):
        X = x.reshape(m, n)
        Ub, sb, Vb = np.linalg.svd(X, full_matrices=False)
        Ub, sb, Vb = Ub[:, :r], sb[:r], Vb[:r].T
        best = np.inf
        for _ in range(k):
            pi = rng.permutation(r)
            a = rng.choice([-1.0, 1.0], size=r)
            b = rng.choice([-1.0, 1.0], size=r)
            Wp = _orthogonal(r, rng)
            mu = a * b * sb[pi]
            Uc = (Ub[:, pi] * a) @ Wp.T
            Vc = (Vb[:, pi] * b) @ Wp.T
            Mc = Wp @ np.diag(mu) @ Wp.T
            cand = np.concatenate([Uc.reshape(-1), from_sym(Mc), Vc.reshape(-1)])
            best = min(best, float(np.linalg.norm(cand - y)))
        return best

    return CatalogEntry(
        entry_id=f"msvd({m},{n},{r})",
        params={"m": m, "n": n, "r": r},
        lift=lift,
        set_desc=cn.BoundedRank(m, n, r),
        regimes=("generic", "opposite_pair", "singular"),
        sample_point=sample,
        expected_verdicts=expected,
        pathological=pathological,
        min_fiber_distance=min_fiber_distance,
    )


def _rotation_sending(a, b, n):
    """Orthogonal matrix mapping unit a to unit b, identity on their complement."""
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    c = float(a @ b)
    if abs(c - 1.0) < 1e-14:
        return np.eye(n)
    if abs(c + 1.0) < 1e-14:
        return np.eye(n) - 2.0 * np.outer(a, a)
    w = b - c * a
    w /= np.linalg.norm(w)
    G = np.eye(n) + (c - 1.0) * (np.outer(a, a) + np.outer(w, w)) + np.sqrt(1.0 - c * c) * (
        np.outer(w, a) - np.outer(a, w))
    return G


# ---------------------------------------------------------------------------
# multilinear, nodal cubic, disk


def cp_rank1(dims):
    dims = tuple(int(d) for d in dims)
    if len(dims) < 3:
        raise InvalidInput("the multilinear obstruction needs order >= 3")
    total = sum(dims)
    man = mf.ChartDomain(total)
    offs = np.concatenate([[0], np.cumsum(dims)]).astype(int)

    def unpack(y):
        return [y[offs[i]: offs[i + 1]] for i in range(len(dims))]

    def outer(factors):
        O = factors[0]
        for f in factors[1:]:
            O = np.multiply.outer(O, f)
        return O

    def phi(y):
        return outer(unpack(y)).reshape(-1)

    def dphi(y):
        fs = unpack(y)

        def dd(e):
            es = unpack(e)
            out = np.zeros(np.prod(dims))
            for i in range(len(dims)):
                out += outer(fs[:i] + [es[i]] + fs[i + 1:]).reshape(-1)
            return out

        return _jacobian_from_directional(total, dd)

    def d2phi(y, v):
        fs = unpack(y)
        es = unpack(v)
        out = np.zeros(int(np.prod(dims)))
        for i in range(len(dims)):
            for j in range(i + 1, len(dims)):
                parts = list(fs)
                parts[i] = es[i]
                parts[j] = es[j]
                out += 2.0 * outer(parts).reshape(-1)
        return out

    lift = lc.Lift(man, int(np.prod(dims)), phi, dphi, d2phi, name=f"cp_rank1{dims}")

    def expected(y):
        if np.linalg.norm(y) <= 1e-10:
            return {ONE: False, TWO: False}
        return {}

    def sample(regime, rng):
        rng = _rng_of(rng)
        if regime == "origin":
            return np.zeros(total)
        return rng.standard_normal(total)

    return CatalogEntry(
        entry_id=f"cp_rank1{dims}",
        params={"dims": dims},
        lift=lift,
        set_desc=cn.Rank1Tensors(dims),
        regimes=("origin", "generic"),
        sample_point=sample,
        expected_verdicts=expected,
    )


def nodal_cubic():
    """Blow-up chart of the nodal cubic; t -> (t^2 - 1, t - t^3, t)."""

    def h(y):
        return np.array([y[0] - y[2] ** 2 + 1.0, y[1] + y[0] * y[2]])

    def dh(y):
        return np.array([[1.0, 0.0, -2.0 * y[2]], [y[2], 1.0, y[0]]])

    def d2h(y, v):
        return np.array([-2.0 * v[2] ** 2, 2.0 * v[0] * v[2]])

    def sampler(rng):
        t = rng.uniform(-1.8, 1.8)
        return np.array([t * t - 1.0, t - t**3, t])

    man = mf.Embedded(3, 2, h, dh, d2h, name="nodal_cubic_curve", sampler=sampler)
    lift = lc.Lift(
        man, 2,
        phi=lambda y: y[:2].copy(),
        dphi=lambda y: np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        d2phi=lambda y, v: np.zeros(2),
        name="nodal_cubic",
    )

    def at_node(y):
        return bool(min(abs(y[2] - 1.0), abs(y[2] + 1.0)) <= 1e-8)

    def expected(y):
        good = not at_node(y)
        return {LOCAL: good, ONE: good, TWO: good}

    def from_t(t):
        return np.array([t * t - 1.0, t - t**3, t])

    def sample(regime, rng):
        rng = _rng_of(rng)
        if regime == "node":
            return from_t(float(rng.choice([-1.0, 1.0])))
        band = rng.choice([0, 1, 2])
        t = [rng.uniform(-0.8, 0.8), rng.uniform(1.15, 1.6), rng.uniform(-1.6, -1.15)][band]
        return from_t(t)

    def pathological(y):
        if not at_node(y):
            raise NoPathology("off the node the parametrization is open")
        t_other = -y[2]

        def x_i(i):
            # approach the image of the opposite branch preimage
            return from_t(t_other * (1.0 - 1.0 / (3.0 * i)))[:2]

        return x_i

    def min_fiber_distance(x, y, k, rng):
        set_desc = cn.NodalCubic()
        ts = set_desc.preimages(np.asarray(x, dtype=float), atol=1e-9)
        if not ts:
            return np.inf
        return min(float(np.linalg.norm(from_t(float(t)) - y)) for t in ts)

    return CatalogEntry(
        entry_id="nodal_cubic",
        params={},
        lift=lift,
        set_desc=cn.NodalCubic(),
        regimes=("node", "smooth"),
        sample_point=sample,
        expected_verdicts=expected,
        pathological=pathological,
        min_fiber_distance=min_fiber_distance,
    )


def disk_quartic():
    """Lift of the unit disk through the quartic sphere y1^2 + y2^2 + y3^4 = 1."""

    def h(y):
        return np.array([y[0] ** 2 + y[1] ** 2 + y[2] ** 4 - 1.0])

    def dh(y):
        return np.array([[2.0 * y[0], 2.0 * y[1], 4.0 * y[2] ** 3]])

    def d2h(y, v):
        return np.array([2.0 * v[0] ** 2 + 2.0 * v[1] ** 2 + 12.0 * y[2] ** 2 * v[2] ** 2])

    def sampler(rng):
        y3 = rng.uniform(-0.95, 0.95)
        rho = np.sqrt(1.0 - y3**4)
        th = rng.uniform(0.0, 2.0 * np.pi)
        return np.array([rho * np.cos(th), rho * np.sin(th), y3])

    man = mf.Embedded(3, 1, h, dh, d2h, name="quartic_sphere", sampler=sampler)
    lift = lc.Lift(
        man, 2,
        phi=lambda y: y[:2].copy(),
        dphi=lambda y: np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        d2phi=lambda y, v: np.zeros(2),
        name="disk_quartic",
    )

    def expected(y):
        equator = bool(abs(y[2]) <= 1e-8)
        return {LOCAL: True, ONE: not equator, TWO: not equator}

    def sample(regime, rng):
        rng = _rng_of(rng)
        th = rng.uniform(0.0, 2.0 * np.pi)
        if regime == "equator":
            return np.array([np.cos(th), np.sin(th), 0.0])
        y3 = rng.uniform(0.4, 0.9) * rng.choice([-1.0, 1.0])
        rho = np.sqrt(1.0 - y3**4)
        return np.array([rho * np.cos(th), rho * np.sin(th), y3])

    return CatalogEntry(
        entry_id="disk_quartic",
        params={},
        lift=lift,
        set_desc=cn.Ball(2),
        regimes=("equator", "interior"),
        sample_point=sample,
        expected_verdicts=expected,
    )


# ---------------------------------------------------------------------------
# registry


BUILDERS = {
    "hadamard": hadamard,
    "hadprod": hadprod,
    "ball": ball,
    "annulus": annulus,
    "burer_monteiro": burer_monteiro,
    "psd_lowrank": psd_lowrank,
    "lr": lr,
    "desing_chart": desing_chart,
    "svd": svd_lift,
    "msvd": msvd_lift,
    "cp_rank1": cp_rank1,
    "nodal_cubic": nodal_cubic,
    "disk_quartic": disk_quartic,
    "eigen_simplex": eigen_simplex,
}


def build(name, **params):
    if name not in BUILDERS:
        raise InvalidInput(f"unknown catalog entry {name!r}; known: {sorted(BUILDERS)}")
    return BUILDERS[name](**params)


def degenerate_directions(entry, y, i, which=0):
    """The i-th element of one degenerate-direction sequence at y."""
    if entry.degenerate_families is None:
        raise NoDegeneracy(f"{entry.entry_id} has no degenerate directions")
    fams = entry.degenerate_families(np.asarray(y, dtype=float).reshape(-1))
    return fams[which].make(i)


def pathological_sequence(entry, y):
    """Generator i -> x_i of downstairs points witnessing failure of openness."""
    if entry.pathological is None:
        raise NoPathology(f"{entry.entry_id} has no pathological sequences")
    return entry.pathological(np.asarray(y, dtype=float).reshape(-1))
