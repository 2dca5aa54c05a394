"""Upstairs manifolds: tangent bases, second-order corrections, and curves.

A manifold is described by one of three variants. ``ChartDomain(d)`` is an
open chart identified with R^d. ``Embedded`` carries a defining function h
with value/Jacobian/second-derivative oracles whose zero set is the manifold;
its Jacobian must keep the declared full row rank near the zero set.
``Product`` concatenates coordinates of its factors. The sphere and Stiefel
builtins are Embedded instances with closed-form defining functions and
specialized samplers.

Curves with prescribed velocity v and extrinsic acceleration u are realized
by Gauss-Newton projection of y + t*v + (t^2/2)*u back onto the zero set of
h, which reproduces the requested 2-jet up to O(t^3).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import numerics as nx
from .errors import ConstantRankViolation, InvalidInput, RetractionFailure

POINT_TOL = 1e-10
TANGENT_TOL = 1e-8


@dataclass(frozen=True)
class ChartDomain:
    dim: int

    def __post_init__(self):
        if self.dim <= 0:
            raise InvalidInput("chart dimension must be positive")


@dataclass(frozen=True)
class Embedded:
    """Zero set of h: R^ambient_dim -> R^codim with constant-rank Jacobian.

    d2h(y, v) must return the second derivative D^2 h(y)[v, v].
    """

    ambient_dim: int
    codim: int
    h: Callable[[np.ndarray], np.ndarray]
    dh: Callable[[np.ndarray], np.ndarray]
    d2h: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = ""
    builtin: Optional[str] = None
    sampler: Optional[Callable[[np.random.Generator], np.ndarray]] = None

    def __post_init__(self):
        if self.ambient_dim <= 0 or not (0 < self.codim < self.ambient_dim):
            raise InvalidInput("embedded manifold needs 0 < codim < ambient_dim")


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise InvalidInput("product of zero manifolds")


def ambient_dim(m):
    if isinstance(m, ChartDomain):
        return m.dim
    if isinstance(m, Embedded):
        return m.ambient_dim
    if isinstance(m, Product):
        return sum(ambient_dim(f) for f in m.factors)
    raise InvalidInput(f"not a manifold description: {m!r}")


def dim(m):
    if isinstance(m, ChartDomain):
        return m.dim
    if isinstance(m, Embedded):
        return m.ambient_dim - m.codim
    if isinstance(m, Product):
        return sum(dim(f) for f in m.factors)
    raise InvalidInput(f"not a manifold description: {m!r}")


def factor_slices(m):
    """Coordinate slices of the factors of a Product (the whole range else)."""
    if not isinstance(m, Product):
        return [(m, slice(0, ambient_dim(m)))]
    out = []
    offset = 0
    for f in m.factors:
        d = ambient_dim(f)
        out.append((f, slice(offset, offset + d)))
        offset += d
    return out


# ---------------------------------------------------------------------------
# builtins


def sphere(n):
    """Unit sphere S^{n-1} embedded in R^n."""
    if n < 2:
        raise InvalidInput("sphere needs ambient dimension >= 2")

    def h(y):
        return np.array([y @ y - 1.0])

    def dh(y):
        return 2.0 * y[None, :]

    def d2h(y, v):
        return np.array([2.0 * (v @ v)])

    def sample(rng):
        y = rng.standard_normal(n)
        return y / np.linalg.norm(y)

    return Embedded(n, 1, h, dh, d2h, name=f"sphere({n})", builtin="sphere", sampler=sample)


def stiefel(m, r):
    """Stiefel manifold St(m, r) of m x r orthonormal frames, row-major flattening."""
    if not (1 <= r <= m):
        raise InvalidInput("stiefel needs 1 <= r <= m")
    pairs = [(i, j) for i in range(r) for j in range(i, r)]
    k = len(pairs)

    def h(y):
        Y = y.reshape(m, r)
        G = Y.T @ Y - np.eye(r)
        return np.array([G[i, j] for i, j in pairs])

    def dh(y):
        Y = y.reshape(m, r)
        J = np.zeros((k, m * r))
        for row, (i, j) in enumerate(pairs):
            G = np.zeros((m, r))
            G[:, i] += Y[:, j]
            G[:, j] += Y[:, i]
            J[row] = G.reshape(-1)
        return J

    def d2h(y, v):
        V = v.reshape(m, r)
        return np.array([2.0 * (V[:, i] @ V[:, j]) for i, j in pairs])

    def sample(rng):
        a = rng.standard_normal((m, r))
        q, rr = np.linalg.qr(a)
        q = q * np.sign(np.where(np.diag(rr) == 0, 1.0, np.diag(rr)))
        return q.reshape(-1)

    return Embedded(m * r, k, h, dh, d2h, name=f"stiefel({m},{r})", builtin="stiefel", sampler=sample)


# ---------------------------------------------------------------------------
# core operations


def _jacobian(m: Embedded, y):
    J = np.atleast_2d(np.asarray(m.dh(y), dtype=float))
    if J.shape != (m.codim, m.ambient_dim):
        raise InvalidInput(f"dh returned shape {J.shape}, expected {(m.codim, m.ambient_dim)}")
    return J


def _require_full_rank(m: Embedded, y, tol):
    J = _jacobian(m, y)
    if nx.numerical_rank(J, tol) != m.codim:
        raise ConstantRankViolation(
            f"Jacobian of {m.name or 'embedded manifold'} has rank "
            f"{nx.numerical_rank(J, tol)} < declared codim {m.codim}"
        )
    return J


def on_manifold_residual(m, y):
    y = nx.require_finite("y", y).reshape(-1)
    if y.shape[0] != ambient_dim(m):
        raise InvalidInput(f"point has dimension {y.shape[0]}, manifold ambient is {ambient_dim(m)}")
    if isinstance(m, ChartDomain):
        return 0.0
    if isinstance(m, Embedded):
        return float(np.linalg.norm(np.asarray(m.h(y), dtype=float)))
    return max(on_manifold_residual(f, y[s]) for f, s in factor_slices(m))


def check_point(m, y, atol=POINT_TOL):
    if on_manifold_residual(m, y) > atol:
        raise InvalidInput(f"point is off the manifold (residual {on_manifold_residual(m, y):.3e})")
    return np.asarray(y, dtype=float).reshape(-1)


def tangent_basis(m, y, tol=nx.DEFAULT_TOL):
    """Orthonormal basis of the tangent space at y, as ambient columns."""
    if isinstance(m, ChartDomain):
        return np.eye(m.dim)
    if isinstance(m, Embedded):
        J = _require_full_rank(m, y, tol)
        return nx.kernel_basis(J, tol)
    blocks = []
    total = ambient_dim(m)
    offset = 0
    for f, s in factor_slices(m):
        bf = tangent_basis(f, y[s], tol)
        block = np.zeros((total, bf.shape[1]))
        block[s] = bf
        blocks.append(block)
        offset += 1
    return np.hstack(blocks)


def check_tangent(m, y, v, rtol=TANGENT_TOL):
    v = nx.require_finite("v", v).reshape(-1)
    nv = np.linalg.norm(v)
    if nv == 0:
        return v
    if isinstance(m, ChartDomain):
        return v
    if isinstance(m, Embedded):
        if np.linalg.norm(_jacobian(m, y) @ v) > rtol * nv:
            raise InvalidInput("vector is not tangent to the manifold")
        return v
    for f, s in factor_slices(m):
        check_tangent(f, y[s], v[s], rtol)
    return v


def second_order_correction(m, y, v, tol=nx.DEFAULT_TOL):
    """Minimum-norm u with Dh(y)[u] = -D^2 h(y)[v, v].

    This u is orthogonal to the tangent space, hence equals the extrinsic
    acceleration of the geodesic through (y, v) when the manifold carries the
    induced metric.
    """
    if isinstance(m, ChartDomain):
        return np.zeros(m.dim)
    if isinstance(m, Embedded):
        J = _require_full_rank(m, y, tol)
        rhs = -np.asarray(m.d2h(y, v), dtype=float).reshape(-1)
        return nx.min_norm_solve(J, rhs, tol)
    out = np.zeros(ambient_dim(m))
    for f, s in factor_slices(m):
        out[s] = second_order_correction(f, y[s], v[s], tol)
    return out


def gauss_newton_project(m: Embedded, z, max_iter=60, resid_tol=1e-13):
    """Find a nearby manifold point by Gauss-Newton iteration on h."""
    c = np.asarray(z, dtype=float).reshape(-1).copy()
    scale = 1.0 + np.linalg.norm(c)
    for _ in range(max_iter):
        r = np.asarray(m.h(c), dtype=float).reshape(-1)
        if np.linalg.norm(r, np.inf) <= resid_tol * scale:
            return c
        J = _jacobian(m, c)
        step = nx.min_norm_solve(J, r)
        c = c - step
        if not np.all(np.isfinite(c)):
            break
    r = np.asarray(m.h(c), dtype=float).reshape(-1)
    if np.linalg.norm(r, np.inf) <= resid_tol * scale:
        return c
    raise RetractionFailure(f"projection stalled with residual {np.linalg.norm(r):.3e}")


def curve(m, y, v, u, t):
    """Point c(t) on the manifold with c(0)=y, c'(0)=v, and extrinsic c''(0)=u.

    u must satisfy Dh(y)[u] = -D^2 h(y)[v, v]; the straight 2-jet is then
    O(t^3) from the manifold and projection preserves the jet.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    z = y + t * v + 0.5 * t * t * u
    if isinstance(m, ChartDomain):
        return z
    if isinstance(m, Embedded):
        return gauss_newton_project(m, z)
    out = np.zeros_like(z)
    for f, s in factor_slices(m):
        out[s] = curve(f, y[s], v[s], u[s], t)
    return out


def project_tangent(m, y, z, tol=nx.DEFAULT_TOL):
    """Orthogonal projection of an ambient vector onto the tangent space at y."""
    b = tangent_basis(m, y, tol)
    return nx.project_onto(b, z)


def random_point(m, rng, max_tries=25):
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    if isinstance(m, ChartDomain):
        return rng.standard_normal(m.dim)
    if isinstance(m, Embedded):
        if m.sampler is not None:
            return m.sampler(rng)
        for _ in range(max_tries):
            try:
                return gauss_newton_project(m, rng.standard_normal(m.ambient_dim))
            except RetractionFailure:
                continue
        raise RetractionFailure(f"could not sample a point on {m.name or 'manifold'}")
    out = np.zeros(ambient_dim(m))
    for f, s in factor_slices(m):
        out[s] = random_point(f, rng)
    return out


def random_tangent(m, y, rng, tol=nx.DEFAULT_TOL):
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    b = tangent_basis(m, y, tol)
    coef = rng.standard_normal(b.shape[1])
    v = b @ coef
    n = np.linalg.norm(v)
    if n == 0:
        v = b[:, 0]
        n = 1.0
    return v / n


def check_constant_rank(m, y, rng, n_probes=4, step=1e-3, tol=nx.DEFAULT_TOL):
    """Spot-check that the Jacobian rank of h is locally constant.

    Samples nearby on-manifold points along random curves and compares ranks;
    this probes (without proving) the constant-rank hypothesis.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    if isinstance(m, ChartDomain):
        return True
    if isinstance(m, Product):
        return all(check_constant_rank(f, y[s], rng, n_probes, step, tol) for f, s in factor_slices(m))
    base = nx.numerical_rank(_jacobian(m, y), tol)
    if base != m.codim:
        raise ConstantRankViolation(f"rank {base} != declared codim {m.codim} at base point")
    for _ in range(n_probes):
        v = random_tangent(m, y, rng, tol)
        u = second_order_correction(m, y, v, tol)
        y2 = curve(m, y, v, u, step)
        if nx.numerical_rank(_jacobian(m, y2), tol) != base:
            raise ConstantRankViolation("Jacobian rank changes near the base point")
    return True
