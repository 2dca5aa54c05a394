"""Downstairs sets and their tangent cones.

Each set descriptor can test feasibility, sample feasible points near a
center (the brute-force tangent oracle builds difference quotients from
those), and produce a tagged tangent-cone representation at a feasible point.
Cones support membership tests with a violation magnitude, nearest-point
projection, direction sampling, and the stationarity gap

    gap(w) = inf { <w, v> : v in cone, ||v|| = 1 },

so that w lies in the dual cone exactly when gap(w) >= 0 (up to tolerance).
Closed forms are used wherever the cone structure permits; the slice variant
falls back to a sampled estimate and says so.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import nnls

from . import numerics as nx
from .errors import InvalidInput, SamplerExhausted

FEAS_TOL = 1e-9
ACTIVITY_TOL = 1e-7


def _rng_of(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _sym(a):
    return 0.5 * (a + a.T)


# ---------------------------------------------------------------------------
# tangent cones


@dataclass(frozen=True)
class MemberResult:
    inside: bool
    violation: float


@dataclass(frozen=True)
class SubspaceCone:
    basis: np.ndarray  # ambient x k, orthonormal

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    def violation(self, v):
        return float(np.linalg.norm(v - nx.project_onto(self.basis, v)))

    def project(self, v):
        return nx.project_onto(self.basis, v)

    def gap(self, w):
        if self.basis.shape[1] == 0:
            return np.inf, None
        p = nx.project_onto(self.basis, w)
        n = np.linalg.norm(p)
        if n == 0:
            return 0.0, None
        return -float(n), -p / n

    def as_subspace(self):
        return self.basis

    def sample(self, rng):
        if self.basis.shape[1] == 0:
            raise SamplerExhausted("trivial cone has no unit members")
        v = self.basis @ rng.standard_normal(self.basis.shape[1])
        return v / np.linalg.norm(v)

    def span_dim(self):
        return self.basis.shape[1]


@dataclass(frozen=True)
class PolyhedralCone:
    """{v : eq @ v = 0, ineq @ v >= 0}."""

    eq: np.ndarray
    ineq: np.ndarray

    @property
    def ambient_dim(self):
        return self.eq.shape[1] if self.eq.size else self.ineq.shape[1]

    def violation(self, v):
        out = 0.0
        if self.eq.size:
            out = max(out, float(np.max(np.abs(self.eq @ v))))
        if self.ineq.size:
            out = max(out, float(np.max(np.clip(-(self.ineq @ v), 0.0, None))))
        return out

    def _null_and_gens(self):
        n = self.ambient_dim
        N = nx.kernel_basis(self.eq) if self.eq.size else np.eye(n)
        G = self.ineq @ N if self.ineq.size else np.zeros((0, N.shape[1]))
        return N, G

    def project(self, v):
        """Euclidean projection onto the (convex) cone via Moreau + NNLS."""
        N, G = self._null_and_gens()
        c0 = N.T @ np.asarray(v, dtype=float).reshape(-1)
        if G.shape[0] == 0:
            return N @ c0
        lam, _ = nnls(G.T, -c0)
        return N @ (c0 + G.T @ lam)

    def gap(self, w):
        p = self.project(-np.asarray(w, dtype=float).reshape(-1))
        n = np.linalg.norm(p)
        if n <= 1e-15:
            return 0.0, None
        return -float(n), p / n

    def as_subspace(self):
        if self.ineq.size:
            return None
        N, _ = self._null_and_gens()
        return N

    def sample(self, rng):
        for _ in range(50):
            v = self.project(rng.standard_normal(self.ambient_dim))
            n = np.linalg.norm(v)
            if n > 1e-10:
                return v / n
        raise SamplerExhausted("polyhedral cone sampling kept hitting the origin")

    def span_dim(self):
        N, _ = self._null_and_gens()
        return N.shape[1]


@dataclass(frozen=True)
class BoundedRankCone:
    """Tangent cone to rank-<= r matrices at a rank-s point.

    Membership asks the (U2, V2) corner block to have rank at most q = r - s;
    the remaining components are free. At s = r the cone is the subspace with
    vanishing corner block, and at rank-deficient points its dual is trivial.
    """

    m: int
    n: int
    r: int
    s: int
    U1: np.ndarray
    V1: np.ndarray
    U2: np.ndarray
    V2: np.ndarray

    @property
    def ambient_dim(self):
        return self.m * self.n

    @property
    def budget(self):
        return self.r - self.s

    def _block(self, v):
        return self.U2.T @ v.reshape(self.m, self.n) @ self.V2

    def violation(self, v):
        b = self._block(np.asarray(v, dtype=float))
        if min(b.shape) <= self.budget:
            return 0.0
        sv = np.linalg.svd(b, compute_uv=False)
        return float(sv[self.budget]) if sv.size > self.budget else 0.0

    def project(self, v):
        V = np.asarray(v, dtype=float).reshape(self.m, self.n)
        b = self.U2.T @ V @ self.V2
        if min(b.shape) > self.budget:
            u, sv, vh = np.linalg.svd(b)
            sv[self.budget:] = 0.0
            b_tr = (u * sv) @ vh
            V = V + self.U2 @ (b_tr - self.U2.T @ V @ self.V2) @ self.V2.T
        return V.reshape(-1)

    def gap(self, w):
        W = np.asarray(w, dtype=float).reshape(self.m, self.n)
        b = self.U2.T @ W @ self.V2
        q = min(self.budget, min(b.shape))
        sv = np.linalg.svd(b, compute_uv=False) if b.size else np.zeros(0)
        block_gain = float(np.sqrt(np.sum(sv[:q] ** 2))) if q else 0.0
        free_norm_sq = max(float(np.sum(W * W) - np.sum(b * b)), 0.0)
        total = np.sqrt(free_norm_sq + block_gain**2)
        if total <= 1e-15:
            return 0.0, None
        # assemble the minimizing direction: negative free part plus the
        # sign-flipped top-q block
        D = -(W - self.U2 @ b @ self.V2.T)
        if q:
            u, s2, vh = np.linalg.svd(b)
            s2t = np.where(np.arange(s2.size) < q, s2, 0.0)
            D = D - self.U2 @ ((u * s2t) @ vh) @ self.V2.T
        return -float(total), D.reshape(-1) / np.linalg.norm(D)

    def as_subspace(self):
        if self.budget >= min(self.m - self.s, self.n - self.s):
            return np.eye(self.m * self.n)
        if self.budget > 0:
            return None
        rows = []
        for a in range(self.m - self.s):
            for b in range(self.n - self.s):
                rows.append(np.outer(self.U2[:, a], self.V2[:, b]).reshape(-1))
        return nx.kernel_basis(np.array(rows))

    def sample(self, rng):
        V = rng.standard_normal((self.m, self.n))
        V = V - self.U2 @ (self.U2.T @ V @ self.V2) @ self.V2.T
        q = min(self.budget, self.m - self.s, self.n - self.s)
        if q and rng.random() > 0.2:
            a = rng.standard_normal((self.m - self.s, q))
            b = rng.standard_normal((q, self.n - self.s))
            V = V * rng.random() + self.U2 @ (a @ b) @ self.V2.T
        out = V.reshape(-1)
        return out / np.linalg.norm(out)

    def span_dim(self):
        if self.budget > 0:
            return self.m * self.n
        return self.m * self.n - (self.m - self.s) * (self.n - self.s)


@dataclass(frozen=True)
class PsdRankCone:
    """Tangent cone to PSD-and-rank-bounded matrices at a rank-s point.

    In the eigenbasis U of the base point (leading s columns spanning its
    column space), members are symmetric with corner block V3 PSD of rank at
    most q = r - s; the (1, 1) and (1, 2) blocks are free. The dual consists
    of matrices supported on the corner block with a PSD block there.
    """

    n: int
    r: int
    s: int
    U: np.ndarray

    @property
    def ambient_dim(self):
        return self.n * self.n

    @property
    def budget(self):
        return self.r - self.s

    def _blocks(self, v):
        A = np.asarray(v, dtype=float).reshape(self.n, self.n)
        skew = float(np.linalg.norm(A - A.T)) / 2.0
        W = self.U.T @ _sym(A) @ self.U
        s = self.s
        return skew, W[:s, :s], W[:s, s:], W[s:, s:]

    def violation(self, v):
        skew, _, _, w3 = self._blocks(v)
        out = skew
        if w3.size:
            mu = np.linalg.eigvalsh(w3)
            out = max(out, float(max(0.0, -mu[0])))
            desc = np.sort(mu)[::-1]
            if desc.size > self.budget:
                out = max(out, float(max(0.0, desc[self.budget])))
        return out

    def project(self, v):
        A = _sym(np.asarray(v, dtype=float).reshape(self.n, self.n))
        W = self.U.T @ A @ self.U
        s = self.s
        w3 = W[s:, s:]
        if w3.size:
            mu, E = np.linalg.eigh(_sym(w3))
            mu = np.clip(mu, 0.0, None)
            order = np.argsort(mu)[::-1]
            keep = order[: self.budget]
            w3_new = (E[:, keep] * mu[keep]) @ E[:, keep].T if keep.size else np.zeros_like(w3)
            W[s:, s:] = w3_new
        return (self.U @ W @ self.U.T).reshape(-1)

    def gap(self, w):
        skew_part, w1, w2, w3 = self._blocks(w)
        free_sq = float(np.sum(w1 * w1) + 2.0 * np.sum(w2 * w2))
        s, q = self.s, self.budget
        corner_gap = None
        corner_dir = None
        if w3.size and q > 0:
            mu, E = np.linalg.eigh(_sym(w3))
            neg = mu[mu < 0.0][:q]
            if neg.size:
                corner_gap = -float(np.linalg.norm(neg))
                weights = -neg / np.linalg.norm(neg)
                cols = E[:, : neg.size]
                corner_dir = (cols * weights) @ cols.T
            else:
                corner_gap = float(mu[0])
                corner_dir = np.outer(E[:, 0], E[:, 0])
        if s == 0:
            if corner_gap is None:
                return (0.0, None) if free_sq == 0 else (np.inf, None)
            D = np.zeros((self.n, self.n))
            D[s:, s:] = corner_dir
            out = self.U @ D @ self.U.T
            return corner_gap, out.reshape(-1) / np.linalg.norm(out)
        free_gain = np.sqrt(free_sq)
        corner_gain = -corner_gap if (corner_gap is not None and corner_gap < 0) else 0.0
        total = np.sqrt(free_gain**2 + corner_gain**2)
        if total <= 1e-15:
            return 0.0, None
        D = np.zeros((self.n, self.n))
        D[:s, :s] = -w1
        D[:s, s:] = -w2
        D[s:, :s] = -w2.T
        if corner_gain > 0:
            D[s:, s:] = corner_gain * corner_dir
        out = self.U @ D @ self.U.T
        return -float(total), out.reshape(-1) / np.linalg.norm(out)

    def as_subspace(self):
        if self.budget > 0 or self.s == self.n:
            return None
        cols = []
        s = self.s
        for i in range(self.n):
            for j in range(i, self.n):
                if i >= s and j >= s:
                    continue
                E = np.zeros((self.n, self.n))
                if i == j:
                    E[i, i] = 1.0
                else:
                    E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
                cols.append((self.U @ E @ self.U.T).reshape(-1))
        return np.array(cols).T

    def sample(self, rng):
        s, q = self.s, self.budget
        D = np.zeros((self.n, self.n))
        mode = rng.random()
        if s and mode < 0.85:
            D[:s, :s] = _sym(rng.standard_normal((s, s)))
            D[:s, s:] = rng.standard_normal((s, self.n - s))
            D[s:, :s] = D[:s, s:].T
        if q and self.n - s and (mode > 0.25 or s == 0):
            B = rng.standard_normal((self.n - s, q))
            D[s:, s:] = B @ B.T
        if np.linalg.norm(D) < 1e-12:
            if s == 0:
                raise SamplerExhausted("degenerate PSD cone block")
            D[0, 0] = 1.0
        out = (self.U @ D @ self.U.T).reshape(-1)
        return out / np.linalg.norm(out)

    def span_dim(self):
        s, n, q = self.s, self.n, self.budget
        d = s * (s + 1) // 2 + s * (n - s)
        if q > 0:
            d += (n - s) * (n - s + 1) // 2
        return d


@dataclass(frozen=True)
class ProductCone:
    cones: tuple
    dims: tuple

    @property
    def ambient_dim(self):
        return sum(self.dims)

    def _slices(self):
        offs = np.concatenate([[0], np.cumsum(self.dims)]).astype(int)
        return [slice(offs[i], offs[i + 1]) for i in range(len(self.cones))]

    def violation(self, v):
        return max(c.violation(v[s]) for c, s in zip(self.cones, self._slices()))

    def project(self, v):
        out = np.zeros(self.ambient_dim)
        for c, s in zip(self.cones, self._slices()):
            out[s] = c.project(v[s])
        return out

    def gap(self, w):
        gaps, dirs = [], []
        for c, s in zip(self.cones, self._slices()):
            g, d = c.gap(w[s])
            gaps.append(g)
            dirs.append(d)
        finite = [g for g in gaps if np.isfinite(g)]
        if not finite:
            return np.inf, None
        negs = [(i, g) for i, g in enumerate(gaps) if np.isfinite(g) and g < 0]
        slices = self._slices()
        if not negs:
            i = int(np.argmin([g if np.isfinite(g) else np.inf for g in gaps]))
            d_full = None
            if dirs[i] is not None:
                d_full = np.zeros(self.ambient_dim)
                d_full[slices[i]] = dirs[i]
            return float(min(finite)), d_full
        total = np.sqrt(sum(g * g for _, g in negs))
        d_full = np.zeros(self.ambient_dim)
        for i, g in negs:
            if dirs[i] is not None:
                d_full[slices[i]] = (-g / total) * dirs[i]
        return -float(total), d_full / max(np.linalg.norm(d_full), 1e-300)

    def as_subspace(self):
        parts = [c.as_subspace() for c in self.cones]
        if any(p is None for p in parts):
            return None
        total = self.ambient_dim
        blocks = []
        for p, s in zip(parts, self._slices()):
            b = np.zeros((total, p.shape[1]))
            b[s] = p
            blocks.append(b)
        return np.hstack(blocks)

    def sample(self, rng):
        slices = self._slices()
        weights = rng.random(len(self.cones)) ** 2
        if np.all(weights < 1e-3):
            weights[int(rng.integers(len(weights)))] = 1.0
        out = np.zeros(self.ambient_dim)
        for c, s, wgt in zip(self.cones, slices, weights):
            try:
                out[s] = wgt * c.sample(rng)
            except SamplerExhausted:
                continue
        n = np.linalg.norm(out)
        if n < 1e-12:
            raise SamplerExhausted("all product factors are trivial")
        return out / n

    def span_dim(self):
        return sum(c.span_dim() for c in self.cones)


@dataclass(frozen=True)
class SliceCone:
    """Base cone intersected with the null space of explicit linear functionals."""

    base: object
    rows: np.ndarray

    @property
    def ambient_dim(self):
        return self.rows.shape[1]

    def violation(self, v):
        lin = float(np.max(np.abs(self.rows @ v))) if self.rows.size else 0.0
        return max(self.base.violation(v), lin)

    def project(self, v, iters=200, tol=1e-12):
        Rp = nx.pinv(self.rows)
        out = np.asarray(v, dtype=float).reshape(-1).copy()
        for _ in range(iters):
            out = self.base.project(out)
            out = out - Rp @ (self.rows @ out)
            if self.violation(out) <= tol:
                break
        return out

    def gap(self, w, samples=2000, seed=0):
        """Exact when the sliced cone is a subspace, otherwise a sampled estimate.

        The sampled value is an upper bound on the true infimum; callers that
        need certified duals should stick to subspace/polyhedral/psd variants.
        """
        sub = self.as_subspace()
        if sub is not None:
            return SubspaceCone(sub).gap(w)
        rng = _rng_of(seed)
        w = np.asarray(w, dtype=float).reshape(-1)
        best, best_dir = np.inf, None
        for _ in range(samples):
            try:
                v = self.sample(rng)
            except SamplerExhausted:
                break
            val = float(w @ v)
            if val < best:
                best, best_dir = val, v
        if not np.isfinite(best):
            return np.inf, None
        return best, best_dir

    def as_subspace(self):
        base_sub = self.base.as_subspace()
        if base_sub is None:
            return None
        if not self.rows.size:
            return base_sub
        coeff = nx.kernel_basis(self.rows @ base_sub)
        return nx.orthonormalize(base_sub @ coeff)

    def sample(self, rng):
        for _ in range(60):
            try:
                v = self.project(self.base.sample(rng))
            except SamplerExhausted:
                raise
            n = np.linalg.norm(v)
            if n > 1e-8 and self.violation(v / n) <= 1e-10:
                return v / n
        raise SamplerExhausted("slice sampling failed to stay on the cone")

    def span_dim(self, probes=200, seed=0):
        rng = _rng_of(seed)
        vs = []
        for _ in range(probes):
            try:
                vs.append(self.sample(rng))
            except SamplerExhausted:
                break
        if not vs:
            return 0
        return nx.numerical_rank(np.array(vs))


@dataclass(frozen=True)
class UnionCone:
    branches: tuple

    @property
    def ambient_dim(self):
        return self.branches[0].ambient_dim

    def violation(self, v):
        return min(b.violation(v) for b in self.branches)

    def project(self, v):
        best, best_d = np.inf, v
        for b in self.branches:
            p = b.project(v)
            d = np.linalg.norm(p - v)
            if d < best:
                best, best_d = d, p
        return best_d

    def gap(self, w):
        best, best_dir = np.inf, None
        for b in self.branches:
            g, d = b.gap(w)
            if g < best:
                best, best_dir = g, d
        return best, best_dir

    def as_subspace(self):
        if len(self.branches) == 1:
            return self.branches[0].as_subspace()
        return None

    def sample(self, rng):
        return self.branches[int(rng.integers(len(self.branches)))].sample(rng)

    def span_dim(self):
        spans = []
        for b in self.branches:
            s = b.as_subspace()
            if s is None:
                return self.ambient_dim
            spans.append(s)
        return nx.numerical_rank(np.hstack(spans))


def _contract_except(T, factors, axis):
    """Contract every tensor axis but `axis` against the matching factor."""
    contr = T
    for other in range(len(factors) - 1, -1, -1):
        if other == axis:
            continue
        contr = np.tensordot(contr, factors[other], axes=([other], [0]))
    return contr


def _rank1_approx(T, iters=60, starts=3, seed=0):
    """Best rank-1 approximation of a d-way tensor by alternating contractions.

    Returns (lam, unit factors, rank-1 tensor) with lam = <T, outer(factors)>
    maximized over sign-normalized starts (HOSVD leading vectors plus random).
    """
    dims = T.shape
    d = len(dims)
    rng = _rng_of(seed)
    hosvd = []
    for axis in range(d):
        M = np.moveaxis(T, axis, 0).reshape(dims[axis], -1)
        u, _, _ = np.linalg.svd(M, full_matrices=False)
        hosvd.append(u[:, 0])
    inits = [hosvd]
    for _ in range(starts):
        inits.append([(lambda g: g / np.linalg.norm(g))(rng.standard_normal(k)) for k in dims])
    best_val, best_factors = -1.0, None
    for factors in inits:
        factors = [f.copy() for f in factors]
        lam = 0.0
        for _ in range(iters):
            for axis in range(d):
                contr = _contract_except(T, factors, axis)
                n = np.linalg.norm(contr)
                if n == 0:
                    break
                factors[axis] = contr / n
                lam = n
        if lam > best_val:
            best_val, best_factors = lam, factors
    if best_factors is None or best_val < 0:
        best_factors = [np.eye(k)[:, 0] for k in dims]
        best_val = 0.0
    O = best_factors[0]
    for f in best_factors[1:]:
        O = np.multiply.outer(O, f)
    return best_val, best_factors, best_val * O


@dataclass(frozen=True)
class Rank1TensorCone:
    dims: tuple

    @property
    def ambient_dim(self):
        return int(np.prod(self.dims))

    def violation(self, v):
        T = np.asarray(v, dtype=float).reshape(self.dims)
        _, _, approx = _rank1_approx(T)
        return float(np.linalg.norm(T - approx))

    def project(self, v):
        T = np.asarray(v, dtype=float).reshape(self.dims)
        _, _, approx = _rank1_approx(T)
        return approx.reshape(-1)

    def gap(self, w):
        W = np.asarray(w, dtype=float).reshape(self.dims)
        lam, factors, _ = _rank1_approx(W, starts=6)
        if lam <= 1e-15:
            return 0.0, None
        O = factors[0]
        for f in factors[1:]:
            O = np.multiply.outer(O, f)
        signed = float(np.sum(W * O))
        direction = -np.sign(signed) * O
        return -abs(signed), direction.reshape(-1)

    def as_subspace(self):
        return None

    def sample(self, rng):
        O = None
        for k in self.dims:
            f = rng.standard_normal(k)
            f /= np.linalg.norm(f)
            O = f if O is None else np.multiply.outer(O, f)
        out = O.reshape(-1) * (1.0 if rng.random() < 0.5 else -1.0)
        return out / np.linalg.norm(out)

    def span_dim(self):
        return self.ambient_dim


# ---------------------------------------------------------------------------
# set descriptors


def project_simplex(z):
    """Euclidean projection onto the standard simplex (sort-based)."""
    z = np.asarray(z, dtype=float).reshape(-1)
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, z.size + 1)
    cond = u - css / ks > 0
    rho = int(np.nonzero(cond)[0][-1])
    theta = css[rho] / (rho + 1.0)
    return np.clip(z - theta, 0.0, None)


@dataclass(frozen=True)
class Simplex:
    n: int

    @property
    def ambient_dim(self):
        return self.n

    def residual(self, x):
        return max(abs(float(np.sum(x) - 1.0)), float(np.max(np.clip(-x, 0.0, None))))

    def sample(self, rng):
        g = rng.standard_normal(self.n) ** 2
        return g / np.sum(g)

    def sample_near(self, x, radius, rng):
        return project_simplex(x + radius * rng.standard_normal(self.n))

    def cone_at(self, x, activity_tol=ACTIVITY_TOL):
        active = [i for i in range(self.n) if x[i] <= activity_tol]
        eq = np.ones((1, self.n))
        ineq = np.eye(self.n)[active] if active else np.zeros((0, self.n))
        return PolyhedralCone(eq, ineq)


def stochastic_matrices(n, m):
    """Column-stochastic n x m matrices as a product of simplex columns."""
    return ProductSet((Simplex(n),) * m, name=f"stochastic({n},{m})")


@dataclass(frozen=True)
class Ball:
    n: int

    @property
    def ambient_dim(self):
        return self.n

    def residual(self, x):
        return max(0.0, float(np.linalg.norm(x) - 1.0))

    def sample(self, rng):
        g = rng.standard_normal(self.n)
        return g / np.linalg.norm(g) * rng.random() ** (1.0 / self.n)

    def sample_near(self, x, radius, rng):
        z = x + radius * rng.standard_normal(self.n)
        nz = np.linalg.norm(z)
        return z if nz <= 1.0 else z / nz

    def cone_at(self, x, activity_tol=ACTIVITY_TOL):
        if np.linalg.norm(x) < 1.0 - activity_tol:
            return SubspaceCone(np.eye(self.n))
        return PolyhedralCone(np.zeros((0, self.n)), -x[None, :])


@dataclass(frozen=True)
class Annulus:
    n: int
    r1: float
    r2: float

    def __post_init__(self):
        if not (0 < self.r1 < self.r2):
            raise InvalidInput("annulus needs 0 < r1 < r2")

    @property
    def ambient_dim(self):
        return self.n

    def residual(self, x):
        nx_ = np.linalg.norm(x)
        return max(0.0, self.r1 - nx_, nx_ - self.r2)

    def sample(self, rng):
        g = rng.standard_normal(self.n)
        g /= np.linalg.norm(g)
        return g * (self.r1 + (self.r2 - self.r1) * rng.random())

    def sample_near(self, x, radius, rng):
        z = x + radius * rng.standard_normal(self.n)
        nz = np.linalg.norm(z)
        clipped = np.clip(nz, self.r1, self.r2)
        return z * (clipped / nz)

    def cone_at(self, x, activity_tol=ACTIVITY_TOL):
        nx_ = np.linalg.norm(x)
        if nx_ <= self.r1 + activity_tol:
            return PolyhedralCone(np.zeros((0, self.n)), x[None, :])
        if nx_ >= self.r2 - activity_tol:
            return PolyhedralCone(np.zeros((0, self.n)), -x[None, :])
        return SubspaceCone(np.eye(self.n))


@dataclass(frozen=True)
class Orthant:
    n: int

    @property
    def ambient_dim(self):
        return self.n

    def residual(self, x):
        return float(np.max(np.clip(-x, 0.0, None)))

    def sample(self, rng):
        return rng.standard_normal(self.n) ** 2

    def sample_near(self, x, radius, rng):
        return np.clip(x + radius * rng.standard_normal(self.n), 0.0, None)

    def cone_at(self, x, activity_tol=ACTIVITY_TOL):
        active = [i for i in range(self.n) if x[i] <= activity_tol]
        ineq = np.eye(self.n)[active] if active else np.zeros((0, self.n))
        return PolyhedralCone(np.zeros((0, self.n)), ineq)


def _truncate_rank(A, r):
    u, s, vh = np.linalg.svd(A, full_matrices=False)
    s[r:] = 0.0
    return (u * s) @ vh


def _psd_truncate(A, r):
    mu, E = np.linalg.eigh(_sym(A))
    mu = np.clip(mu, 0.0, None)
    order = np.argsort(mu)[::-1][:r]
    return (E[:, order] * mu[order]) @ E[:, order].T


@dataclass(frozen=True)
class BoundedRank:
    m: int
    n: int
    r: int

    @property
    def ambient_dim(self):
        return self.m * self.n

    def residual(self, x):
        sv = np.linalg.svd(x.reshape(self.m, self.n), compute_uv=False)
        return float(sv[self.r]) if sv.size > self.r else 0.0

    def sample(self, rng):
        a = rng.standard_normal((self.m, self.r))
        b = rng.standard_normal((self.r, self.n))
        return (a @ b).reshape(-1)

    def sample_near(self, x, radius, rng):
        X = x.reshape(self.m, self.n) + radius * rng.standard_normal((self.m, self.n))
        return _truncate_rank(X, self.r).reshape(-1)

    def cone_at(self, x, tol=nx.DEFAULT_TOL):
        X = x.reshape(self.m, self.n)
        s = nx.numerical_rank(X, tol)
        U1 = nx.range_basis(X, tol)
        V1 = nx.range_basis(X.T, tol)
        U2 = nx.kernel_basis(U1.T) if s else np.eye(self.m)
        V2 = nx.kernel_basis(V1.T) if s else np.eye(self.n)
        return BoundedRankCone(self.m, self.n, self.r, s, U1, V1, U2, V2)


@dataclass(frozen=True)
class PsdBoundedRank:
    n: int
    r: int

    @property
    def ambient_dim(self):
        return self.n * self.n

    def residual(self, x):
        A = x.reshape(self.n, self.n)
        skew = float(np.linalg.norm(A - A.T)) / 2.0
        mu = np.linalg.eigvalsh(_sym(A))
        neg = float(max(0.0, -mu[0]))
        desc = np.sort(mu)[::-1]
        rank_part = float(max(0.0, desc[self.r])) if desc.size > self.r else 0.0
        return max(skew, neg, rank_part)

    def sample(self, rng):
        R = rng.standard_normal((self.n, self.r))
        return (R @ R.T).reshape(-1)

    def sample_near(self, x, radius, rng):
        A = x.reshape(self.n, self.n) + radius * _sym(rng.standard_normal((self.n, self.n)))
        return _psd_truncate(A, self.r).reshape(-1)

    def cone_at(self, x, tol=nx.DEFAULT_TOL):
        A = _sym(x.reshape(self.n, self.n))
        mu, E = np.linalg.eigh(A)
        order = np.argsort(mu)[::-1]
        mu, E = mu[order], E[:, order]
        cutoff = tol.rank_tol_factor * max(mu[0], 0.0) * self.n if mu.size else 0.0
        s = int(np.sum(mu > max(cutoff, 0.0)))
        return PsdRankCone(self.n, self.r, s, E)


@dataclass(frozen=True)
class SmoothSdpSlice:
    """PSD, rank-bounded matrices on an affine slice <A_i, X> = b_i."""

    A_list: tuple
    b_list: tuple
    n: int
    r: int

    @property
    def ambient_dim(self):
        return self.n * self.n

    def residual(self, x):
        base = PsdBoundedRank(self.n, self.r).residual(x)
        X = x.reshape(self.n, self.n)
        lin = max(abs(float(np.sum(A * X) - b)) for A, b in zip(self.A_list, self.b_list))
        return max(base, lin)

    def _project_factor(self, R, iters=60):
        # Gauss-Newton on h_i(R) = <A_i R, R> - b_i
        R = R.copy()
        for _ in range(iters):
            h = np.array([np.sum((A @ R) * R) - b for A, b in zip(self.A_list, self.b_list)])
            if np.max(np.abs(h)) <= 1e-13:
                return R
            J = np.array([(2.0 * (A @ R)).reshape(-1) for A in self.A_list])
            step = nx.min_norm_solve(J, h)
            R = R - step.reshape(R.shape)
        if np.max(np.abs(np.array([np.sum((A @ R) * R) - b for A, b in zip(self.A_list, self.b_list)]))) <= 1e-11:
            return R
        raise SamplerExhausted("factor projection onto the SDP slice stalled")

    def factor_point(self, x):
        X = _sym(x.reshape(self.n, self.n))
        mu, E = np.linalg.eigh(X)
        order = np.argsort(mu)[::-1][: self.r]
        return E[:, order] * np.sqrt(np.clip(mu[order], 0.0, None))

    def sample_near(self, x, radius, rng):
        R = self.factor_point(x)
        scale = radius / max(1.0, 2.0 * np.linalg.norm(R))
        R2 = self._project_factor(R + scale * rng.standard_normal(R.shape))
        return (R2 @ R2.T).reshape(-1)

    def sample(self, rng):
        raise SamplerExhausted("global sampling of an SDP slice is not supported; use sample_near")

    def cone_at(self, x, tol=nx.DEFAULT_TOL):
        base = PsdBoundedRank(self.n, self.r).cone_at(x, tol)
        rows = np.array([_sym(A).reshape(-1) for A in self.A_list])
        return SliceCone(base, rows)


@dataclass(frozen=True)
class NodalCubic:
    """Plane curve x2^2 = x1^2 (x1 + 1), parametrized by t -> (t^2 - 1, t - t^3)."""

    node_tol: float = 1e-8

    @property
    def ambient_dim(self):
        return 2

    @staticmethod
    def param(t):
        return np.array([t * t - 1.0, t - t**3])

    @staticmethod
    def param_velocity(t):
        return np.array([2.0 * t, 1.0 - 3.0 * t * t])

    def preimages(self, x, atol=1e-8):
        if x[0] < -1.0 - atol:
            return []
        root = np.sqrt(max(x[0] + 1.0, 0.0))
        out = []
        for t in (root, -root):
            if abs((t - t**3) - x[1]) <= 10 * np.sqrt(atol):
                out.append(t)
        return sorted(set(np.round(out, 12)))

    def residual(self, x):
        return abs(float(x[1] ** 2 - x[0] ** 2 * (x[0] + 1.0)))

    def sample(self, rng):
        return self.param(rng.uniform(-2.0, 2.0))

    def sample_near(self, x, radius, rng):
        ts = self.preimages(x, atol=1e-6)
        if not ts:
            raise SamplerExhausted("center is not on the nodal cubic")
        t0 = float(ts[int(rng.integers(len(ts)))])
        speed = max(np.linalg.norm(self.param_velocity(t0)), 0.5)
        return self.param(t0 + radius / speed * rng.standard_normal())

    def cone_at(self, x, activity_tol=ACTIVITY_TOL):
        if np.linalg.norm(x) <= activity_tol:
            lines = []
            for t in (1.0, -1.0):
                v = self.param_velocity(t)
                lines.append(SubspaceCone((v / np.linalg.norm(v))[:, None]))
            return UnionCone(tuple(lines))
        ts = self.preimages(x, atol=1e-6)
        if not ts:
            raise InvalidInput("point is not on the nodal cubic")
        branches = []
        for t in ts:
            v = self.param_velocity(float(t))
            branches.append(SubspaceCone((v / np.linalg.norm(v))[:, None]))
        return branches[0] if len(branches) == 1 else UnionCone(tuple(branches))


@dataclass(frozen=True)
class Rank1Tensors:
    dims: tuple

    @property
    def ambient_dim(self):
        return int(np.prod(self.dims))

    def residual(self, x):
        nrm = np.linalg.norm(x)
        if nrm < 1e-14:
            return 0.0
        T = x.reshape(self.dims)
        _, _, approx = _rank1_approx(T)
        return float(np.linalg.norm(T - approx))

    def sample(self, rng):
        scale = rng.standard_normal()
        O = None
        for k in self.dims:
            f = rng.standard_normal(k)
            f /= np.linalg.norm(f)
            O = f if O is None else np.multiply.outer(O, f)
        return (scale * O).reshape(-1)

    def sample_near(self, x, radius, rng):
        if np.linalg.norm(x) < 1e-12:
            O = None
            for k in self.dims:
                f = rng.standard_normal(k)
                f /= np.linalg.norm(f)
                O = f if O is None else np.multiply.outer(O, f)
            return (radius * rng.uniform(0.3, 1.0) * O).reshape(-1)
        T = (x + radius * rng.standard_normal(self.ambient_dim)).reshape(self.dims)
        _, _, approx = _rank1_approx(T)
        return approx.reshape(-1)

    def cone_at(self, x, activity_tol=ACTIVITY_TOL):
        if np.linalg.norm(x) <= activity_tol:
            return Rank1TensorCone(self.dims)
        _, factors, _ = _rank1_approx(x.reshape(self.dims))
        cols = []
        d = len(self.dims)
        for axis in range(d):
            for k in range(self.dims[axis]):
                pieces = []
                for other in range(d):
                    if other == axis:
                        e = np.zeros(self.dims[other])
                        e[k] = 1.0
                        pieces.append(e)
                    else:
                        pieces.append(factors[other])
                O = pieces[0]
                for p in pieces[1:]:
                    O = np.multiply.outer(O, p)
                cols.append(O.reshape(-1))
        return SubspaceCone(nx.range_basis(np.array(cols).T))


@dataclass(frozen=True)
class ProductSet:
    factors: tuple
    name: str = ""

    @property
    def ambient_dim(self):
        return sum(f.ambient_dim for f in self.factors)

    def _slices(self):
        offs = np.concatenate([[0], np.cumsum([f.ambient_dim for f in self.factors])]).astype(int)
        return [slice(offs[i], offs[i + 1]) for i in range(len(self.factors))]

    def residual(self, x):
        return max(f.residual(x[s]) for f, s in zip(self.factors, self._slices()))

    def sample(self, rng):
        return np.concatenate([f.sample(rng) for f in self.factors])

    def sample_near(self, x, radius, rng):
        return np.concatenate([f.sample_near(x[s], radius, rng) for f, s in zip(self.factors, self._slices())])

    def cone_at(self, x, **kw):
        cones = tuple(f.cone_at(x[s], **kw) for f, s in zip(self.factors, self._slices()))
        return ProductCone(cones, tuple(f.ambient_dim for f in self.factors))


@dataclass(frozen=True)
class Preimage:
    """Set {x : F(x) in base} with a constant-rank constraint map.

    The pullback cone {v : DF(x) v in T_{F(x)} base} is formed explicitly when
    the base cone is polyhedral or a subspace.
    """

    fmap: object  # AmbientMap-compatible: value, jac, dim_in, dim_out
    base: object

    @property
    def ambient_dim(self):
        return self.fmap.dim_in

    def residual(self, x):
        return self.base.residual(np.asarray(self.fmap.value(x), dtype=float).reshape(-1))

    def sample_near(self, x, radius, rng, iters=60):
        for _ in range(40):
            z = x + radius * rng.standard_normal(self.ambient_dim)
            # Gauss-Newton toward the feasible set of F(x) in base
            for _ in range(iters):
                fz = np.asarray(self.fmap.value(z), dtype=float).reshape(-1)
                target = fz - self._base_infeasibility(fz)
                if np.linalg.norm(fz - target) <= 1e-12:
                    return z
                J = np.asarray(self.fmap.jac(z), dtype=float)
                z = z - nx.min_norm_solve(J, fz - target)
            if self.residual(z) <= 1e-10:
                return z
        raise SamplerExhausted("preimage sampler failed")

    def _base_infeasibility(self, f):
        # displacement from f to the nearest base point, for simple bases
        if isinstance(self.base, Orthant):
            return f - np.clip(f, 0.0, None)
        raise SamplerExhausted("preimage sampling only supports orthant bases")

    def cone_at(self, x, **kw):
        fx = np.asarray(self.fmap.value(x), dtype=float).reshape(-1)
        inner = self.base.cone_at(fx, **kw)
        J = np.asarray(self.fmap.jac(x), dtype=float)
        if isinstance(inner, SubspaceCone):
            if inner.basis.shape[1] == inner.basis.shape[0]:
                return SubspaceCone(np.eye(self.ambient_dim))
            comp = nx.kernel_basis(inner.basis.T)
            return PolyhedralCone(comp.T @ J, np.zeros((0, self.ambient_dim)))
        if isinstance(inner, PolyhedralCone):
            eq = inner.eq @ J if inner.eq.size else np.zeros((0, self.ambient_dim))
            ineq = inner.ineq @ J if inner.ineq.size else np.zeros((0, self.ambient_dim))
            return PolyhedralCone(eq, ineq)
        raise InvalidInput("preimage cones need a polyhedral or subspace base cone")


# ---------------------------------------------------------------------------
# module-level operations


def cone_at(set_desc, x, tol=nx.DEFAULT_TOL, feas_tol=FEAS_TOL):
    """Tangent cone of the set at a feasible point."""
    x = nx.require_finite("x", x).reshape(-1)
    if set_desc.residual(x) > feas_tol:
        raise InvalidInput(f"point is infeasible (residual {set_desc.residual(x):.3e})")
    try:
        return set_desc.cone_at(x, tol=tol)
    except TypeError:
        return set_desc.cone_at(x)


def member(cone, v, tol=1e-8):
    v = nx.require_finite("v", v).reshape(-1)
    viol = cone.violation(v)
    return MemberResult(bool(viol <= tol), float(viol))


def stationarity_gap(cone, w, with_direction=False):
    """inf over unit cone members v of <w, v>; nonnegative iff w is dual-feasible."""
    w = nx.require_finite("w", w).reshape(-1)
    if np.linalg.norm(w) == 0.0:
        return (0.0, None) if with_direction else 0.0
    g, d = cone.gap(w)
    return (float(g), d) if with_direction else float(g)


def sample_directions(cone, k, seed):
    rng = _rng_of(seed)
    out = []
    attempts = 0
    while len(out) < k:
        attempts += 1
        if attempts > 80 * k:
            raise SamplerExhausted("could not draw enough cone directions")
        v = cone.sample(rng)
        if cone.violation(v) <= 1e-10:
            out.append(v)
    return out


def empirical_tangents(set_desc, x, k, seed, radius=1e-4):
    """Unit difference quotients (x_i - x)/||x_i - x|| from feasible samples."""
    rng = _rng_of(seed)
    x = nx.require_finite("x", x).reshape(-1)
    out = []
    attempts = 0
    while len(out) < k:
        attempts += 1
        if attempts > 200 * k:
            raise SamplerExhausted("set sampler failed to produce nearby feasible points")
        xi = set_desc.sample_near(x, radius * 0.5, rng)
        d = xi - x
        n = np.linalg.norm(d)
        if 1e-12 < n <= radius:
            out.append(d / n)
    return out
