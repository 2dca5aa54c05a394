"""Lifts of nonconvex sets and their first/second derivative maps.

A ``Lift`` packages a manifold with ambient-space oracles for the map phi, its
Jacobian, and its second derivative (any smooth extension off the manifold).
From these we obtain the first derivative map L (restriction of the Jacobian
to a tangent basis) and the curve-acceleration map Q, realized canonically
with the minimum-norm second-order correction. Different realizations of Q
differ by elements of im L only, so every verdict computed downstream is
insensitive to the choice; pairings <w, Q(v)> with w orthogonal to im L are
realization-independent and quadratic in v, which is what ``qform_matrix``
exposes via polarization.

Three combinators build new lifts: composition with a submersion, products,
and fiber products along a constraint map.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import manifold as mf
from . import numerics as nx
from .errors import InvalidInput, NotCoexact, NotSubmersion


@dataclass(frozen=True)
class Lift:
    """A smooth parametrization of a subset of R^ambient_dim.

    phi/dphi/d2phi are oracles for a smooth extension of the lift map to the
    manifold's ambient space; d2phi(y, v) returns the full second derivative
    D^2 phi(y)[v, v]. When only a modulo-im-L realization of curve
    accelerations is available (compositions lacking a second-derivative
    oracle for the inner map), qmap_override supplies it and
    second_order_exact is cleared.
    """

    manifold: object
    ambient_dim: int
    phi: Callable[[np.ndarray], np.ndarray]
    dphi: Callable[[np.ndarray], np.ndarray]
    d2phi: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = ""
    qmap_override: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    second_order_exact: bool = True


@dataclass(frozen=True)
class LQData:
    y: np.ndarray
    x: np.ndarray
    tangent_basis: np.ndarray
    L: np.ndarray
    im_basis: np.ndarray
    ker_basis: np.ndarray


@dataclass(frozen=True)
class AmbientMap:
    """Smooth map between linear spaces with derivative oracles.

    d2(x, v) must return D^2 F(x)[v, v].
    """

    dim_in: int
    dim_out: int
    value: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = ""


@dataclass(frozen=True)
class Submersion:
    """Map from a manifold onto another manifold, given by ambient oracles.

    d2 is optional; without it, composed lifts only expose curve accelerations
    modulo im L (sufficient for every property verdict, insufficient for exact
    Taylor remainders).
    """

    domain: object
    codomain: object
    value: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]
    d2: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    name: str = ""


def value(lift, y, validate=True):
    y = np.asarray(y, dtype=float).reshape(-1)
    if validate:
        mf.check_point(lift.manifold, y)
    x = np.asarray(lift.phi(y), dtype=float).reshape(-1)
    if x.shape[0] != lift.ambient_dim:
        raise InvalidInput(f"phi returned dimension {x.shape[0]}, expected {lift.ambient_dim}")
    return x


def qmap(lift, y, v, tol=nx.DEFAULT_TOL, validate=True):
    """Curve acceleration Q(v) in the ambient space (canonical realization)."""
    y = np.asarray(y, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if validate:
        mf.check_tangent(lift.manifold, y, v)
    if lift.qmap_override is not None:
        return np.asarray(lift.qmap_override(y, v), dtype=float).reshape(-1)
    u = mf.second_order_correction(lift.manifold, y, v, tol)
    second = np.asarray(lift.d2phi(y, v), dtype=float).reshape(-1)
    return second + np.asarray(lift.dphi(y), dtype=float) @ u


class LiftPoint:
    """Cached derivative data of a lift at one point.

    Builds the tangent basis, the matrix of L, im/ker bases, and (lazily) the
    symmetric bilinear tensor behind Q, so repeated quadratic-form queries at
    the same point cost a single tensor contraction.
    """

    def __init__(self, lift, y, tol=nx.DEFAULT_TOL, validate=True):
        self.lift = lift
        self.tol = tol
        self.y = np.asarray(y, dtype=float).reshape(-1)
        if validate:
            mf.check_point(lift.manifold, self.y)
        self.x = value(lift, self.y, validate=False)
        self.basis = mf.tangent_basis(lift.manifold, self.y, tol)
        jac = np.asarray(lift.dphi(self.y), dtype=float)
        if jac.shape != (lift.ambient_dim, mf.ambient_dim(lift.manifold)):
            raise InvalidInput(f"dphi returned shape {jac.shape}")
        self.L = jac @ self.basis
        self.im_basis = nx.range_basis(self.L, tol)
        self.ker_basis = nx.kernel_basis(self.L, tol)
        self._bilinear = None

    @property
    def dim(self):
        return self.basis.shape[1]

    def tangent_from_coords(self, c):
        return self.basis @ np.asarray(c, dtype=float).reshape(-1)

    def qmap_coords(self, c):
        return qmap(self.lift, self.y, self.tangent_from_coords(c), self.tol, validate=False)

    @property
    def bilinear(self):
        """Symmetric tensor B with Q(basis @ c) = sum_ij c_i c_j B[:, i, j]."""
        if self._bilinear is None:
            d = self.dim
            diag = [self.qmap_coords(np.eye(d)[i]) for i in range(d)]
            B = np.zeros((self.lift.ambient_dim, d, d))
            for i in range(d):
                B[:, i, i] = diag[i]
            for i in range(d):
                for j in range(i + 1, d):
                    mixed = self.qmap_coords(np.eye(d)[i] + np.eye(d)[j])
                    B[:, i, j] = B[:, j, i] = 0.5 * (mixed - diag[i] - diag[j])
            self._bilinear = B
        return self._bilinear

    def coexact_part(self, w, rtol=1e-8):
        """Project w onto (im L)^perp; error out if the discarded part is large."""
        w = np.asarray(w, dtype=float).reshape(-1)
        w_perp = w - nx.project_onto(self.im_basis, w)
        if np.linalg.norm(w - w_perp) > rtol * max(1.0, np.linalg.norm(w)):
            raise NotCoexact("costate has a significant component along im L")
        return w_perp

    def qform(self, w, rtol=1e-8):
        """Matrix of v -> <w, Q(v)> on the tangent space, for w (near) im-L-orthogonal."""
        w_perp = self.coexact_part(w, rtol)
        return np.einsum("aij,a->ij", self.bilinear, w_perp)

    def qform_in_basis(self, w, columns, rtol=1e-8):
        """Quadratic form restricted/rotated to the given tangent-coordinate columns."""
        phi = self.qform(w, rtol)
        return columns.T @ phi @ columns


def lq(lift, y, tol=nx.DEFAULT_TOL):
    """First derivative map data at y (L matrix plus im/ker bases)."""
    pt = LiftPoint(lift, y, tol)
    return LQData(pt.y, pt.x, pt.basis, pt.L, pt.im_basis, pt.ker_basis)


def qform_matrix(lift, y, w, tol=nx.DEFAULT_TOL):
    """Symmetric matrix of the quadratic form v -> <w, Q(v)> in the tangent basis."""
    return LiftPoint(lift, y, tol).qform(w)


def taylor_residuals(lift, y, v, ts, tol=nx.DEFAULT_TOL):
    """First- and second-order Taylor remainders of phi along the canonical curve."""
    pt = LiftPoint(lift, y, tol)
    c = pt.basis.T @ np.asarray(v, dtype=float).reshape(-1)
    lv = pt.L @ c
    qv = pt.qmap_coords(c)
    u = mf.second_order_correction(lift.manifold, pt.y, pt.basis @ c, tol)
    r1, r2 = [], []
    for t in ts:
        xt = value(lift, mf.curve(lift.manifold, pt.y, pt.basis @ c, u, t), validate=False)
        r1.append(float(np.linalg.norm(xt - pt.x - t * lv)))
        r2.append(float(np.linalg.norm(xt - pt.x - t * lv - 0.5 * t * t * qv)))
    return np.array(r1), np.array(r2)


# ---------------------------------------------------------------------------
# combinators


def compose_submersion(lift, psi):
    """Lift phi composed with a submersion psi of manifolds.

    The composed lift lives on psi.domain; its L map is the chain-rule product
    and its Q map agrees with Q^phi(L^psi .) modulo im L, exactly when psi
    carries a second-derivative oracle. Surjectivity of the differential of
    psi is checked by rank at every queried point.
    """
    if psi.codomain is not lift.manifold and mf.ambient_dim(psi.codomain) != mf.ambient_dim(lift.manifold):
        raise InvalidInput("submersion codomain does not match the lift's manifold")
    inner_dim = mf.dim(lift.manifold)

    def checked_jac(z):
        J = np.asarray(psi.jac(z), dtype=float)
        yv = np.asarray(psi.value(z), dtype=float).reshape(-1)
        bz = mf.tangent_basis(psi.domain, z)
        by = mf.tangent_basis(lift.manifold, yv)
        if nx.numerical_rank(by.T @ J @ bz) < inner_dim:
            raise NotSubmersion(f"{psi.name or 'inner map'} is not a submersion at the queried point")
        return J, yv

    def phi_c(z):
        return lift.phi(np.asarray(psi.value(z), dtype=float).reshape(-1))

    def dphi_c(z):
        J, yv = checked_jac(z)
        return np.asarray(lift.dphi(yv), dtype=float) @ J

    if psi.d2 is not None and lift.second_order_exact:

        def d2phi_c(z, v):
            J, yv = checked_jac(z)
            jv = J @ np.asarray(v, dtype=float).reshape(-1)
            first = np.asarray(lift.d2phi(yv, jv), dtype=float).reshape(-1)
            return first + np.asarray(lift.dphi(yv), dtype=float) @ np.asarray(psi.d2(z, v), dtype=float).reshape(-1)

        return Lift(psi.domain, lift.ambient_dim, phi_c, dphi_c, d2phi_c,
                    name=f"{lift.name or 'lift'}o{psi.name or 'psi'}")

    def qmap_c(z, v):
        J, yv = checked_jac(z)
        return qmap(lift, yv, J @ np.asarray(v, dtype=float).reshape(-1), validate=False)

    def d2phi_unavailable(z, v):
        raise InvalidInput("composition lacks a second-derivative oracle for the inner map")

    return Lift(psi.domain, lift.ambient_dim, phi_c, dphi_c, d2phi_unavailable,
                name=f"{lift.name or 'lift'}o{psi.name or 'psi'}",
                qmap_override=qmap_c, second_order_exact=False)


def product(lifts):
    """Product lift acting factor-wise; L is block diagonal, Q concatenates."""
    lifts = tuple(lifts)
    if not lifts:
        raise InvalidInput("product of zero lifts")
    if len(lifts) == 1:
        return lifts[0]
    man = mf.Product(tuple(lf.manifold for lf in lifts))
    in_slices = [s for _, s in mf.factor_slices(man)]
    out_dims = [lf.ambient_dim for lf in lifts]
    out_offsets = np.concatenate([[0], np.cumsum(out_dims)]).astype(int)
    total_out = int(out_offsets[-1])
    total_in = mf.ambient_dim(man)

    def phi_p(y):
        return np.concatenate([np.asarray(lf.phi(y[s]), dtype=float).reshape(-1) for lf, s in zip(lifts, in_slices)])

    def dphi_p(y):
        J = np.zeros((total_out, total_in))
        for k, (lf, s) in enumerate(zip(lifts, in_slices)):
            J[out_offsets[k]:out_offsets[k + 1], s] = np.asarray(lf.dphi(y[s]), dtype=float)
        return J

    def d2phi_p(y, v):
        return np.concatenate([
            np.asarray(lf.d2phi(y[s], v[s]), dtype=float).reshape(-1) for lf, s in zip(lifts, in_slices)
        ])

    exact = all(lf.second_order_exact for lf in lifts)
    override = None
    if any(lf.qmap_override is not None for lf in lifts):

        def override(y, v):
            return np.concatenate([qmap(lf, y[s], v[s], validate=False) for lf, s in zip(lifts, in_slices)])

        exact = False
    return Lift(man, total_out, phi_p, dphi_p, d2phi_p,
                name="x".join(lf.name or "lift" for lf in lifts),
                qmap_override=override, second_order_exact=exact)


def defining_function(m):
    """(h, dh, d2h, codim) for a manifold description; identity-free for charts."""
    if isinstance(m, mf.ChartDomain):
        return None, None, None, 0
    if isinstance(m, mf.Embedded):
        return m.h, m.dh, m.d2h, m.codim
    parts = [(f, s, defining_function(f)) for f, s in mf.factor_slices(m)]
    codim = sum(p[2][3] for p in parts)
    amb = mf.ambient_dim(m)

    def h(y):
        out = []
        for f, s, (hf, _, _, cf) in parts:
            if cf:
                out.append(np.asarray(hf(y[s]), dtype=float).reshape(-1))
        return np.concatenate(out) if out else np.zeros(0)

    def dh(y):
        J = np.zeros((codim, amb))
        row = 0
        for f, s, (hf, dhf, _, cf) in parts:
            if cf:
                J[row:row + cf, s] = np.asarray(dhf(y[s]), dtype=float)
                row += cf
        return J

    def d2h(y, v):
        out = []
        for f, s, (hf, dhf, d2hf, cf) in parts:
            if cf:
                out.append(np.asarray(d2hf(y[s], v[s]), dtype=float).reshape(-1))
        return np.concatenate(out) if out else np.zeros(0)

    return h, dh, d2h, codim


def fiber_product(fmap, psi, name="", sampler=None):
    """Fiber product lift of F^{-1}(Z) from a lift psi of Z.

    The constructed manifold is the zero set of (x, y) -> F(x) - psi(y),
    stacked with the defining function of psi's own manifold; the lift map is
    the coordinate projection (x, y) -> x. The constant-rank hypothesis is
    enforced numerically at every queried point (rank drops surface as
    ConstantRankViolation) and can be spot-checked along curves.
    """
    if fmap.dim_out != psi.ambient_dim:
        raise InvalidInput("constraint map codomain must match psi's ambient space")
    hN, dhN, d2hN, codimN = defining_function(psi.manifold)
    n_amb = mf.ambient_dim(psi.manifold)
    dim_x = fmap.dim_in
    total = dim_x + n_amb
    codim = fmap.dim_out + codimN

    def h(p):
        x, y = p[:dim_x], p[dim_x:]
        top = np.asarray(fmap.value(x), dtype=float).reshape(-1) - np.asarray(psi.phi(y), dtype=float).reshape(-1)
        if codimN:
            return np.concatenate([top, np.asarray(hN(y), dtype=float).reshape(-1)])
        return top

    def dh(p):
        x, y = p[:dim_x], p[dim_x:]
        J = np.zeros((codim, total))
        J[:fmap.dim_out, :dim_x] = np.asarray(fmap.jac(x), dtype=float)
        J[:fmap.dim_out, dim_x:] = -np.asarray(psi.dphi(y), dtype=float)
        if codimN:
            J[fmap.dim_out:, dim_x:] = np.asarray(dhN(y), dtype=float)
        return J

    def d2h(p, v):
        x, y = p[:dim_x], p[dim_x:]
        vx, vy = v[:dim_x], v[dim_x:]
        top = np.asarray(fmap.d2(x, vx), dtype=float).reshape(-1) - np.asarray(psi.d2phi(y, vy), dtype=float).reshape(-1)
        if codimN:
            return np.concatenate([top, np.asarray(d2hN(y, vy), dtype=float).reshape(-1)])
        return top

    man = mf.Embedded(total, codim, h, dh, d2h,
                      name=name or f"fiber({fmap.name or 'F'},{psi.name or 'psi'})",
                      sampler=sampler)
    proj = np.zeros((dim_x, total))
    proj[:, :dim_x] = np.eye(dim_x)

    def phi_f(p):
        return p[:dim_x].copy()

    def dphi_f(p):
        return proj

    def d2phi_f(p, v):
        return np.zeros(dim_x)

    return Lift(man, dim_x, phi_f, dphi_f, d2phi_f, name=name or man.name)
