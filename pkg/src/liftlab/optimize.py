"""Upstairs calculus of g = f(phi(.)) and a second-order local solver.

The Riemannian gradient and Hessian of the pulled-back cost are assembled
from the composition formulas: grad in tangent coordinates is L' grad f, and
the Hessian quadratic form is <hess f . Lv, Lv> + <grad f, Q(v)>, where Q
carries the minimum-norm second-order correction. That correction equals the
extrinsic geodesic acceleration for the manifolds used here, so the formula
is the exact Riemannian Hessian; finite differences validate rather than
assume this.

The solver runs gradient descent with Armijo backtracking and, once the
gradient is small, escapes along the most negative Hessian eigenvector, so
its outputs are approximate second-order stationary points with certificates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import cones as cn
from . import lift_core as lc
from . import manifold as mf
from . import numerics as nx
from .errors import InvalidInput, NotConverged


@dataclass(frozen=True)
class Cost:
    f: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess_vec: Callable[[np.ndarray, np.ndarray], np.ndarray]
    tag: str = "custom"


def linear_cost(w):
    w = np.asarray(w, dtype=float).reshape(-1)
    return Cost(
        f=lambda x: float(w @ x),
        grad=lambda x: w.copy(),
        hess_vec=lambda x, u: np.zeros_like(u),
        tag="linear",
    )


def quadratic_shift_cost(w, alpha, center):
    """f(x) = <w, x> + (alpha/2) ||x - center||^2, the witness-cost family."""
    w = np.asarray(w, dtype=float).reshape(-1)
    center = np.asarray(center, dtype=float).reshape(-1)
    alpha = float(alpha)
    return Cost(
        f=lambda x: float(w @ x) + 0.5 * alpha * float(np.sum((x - center) ** 2)),
        grad=lambda x: w + alpha * (x - center),
        hess_vec=lambda x, u: alpha * u,
        tag="quadratic_shift",
    )


def quadratic_quartic_cost(P, q, kappa, center):
    """Convex-quadratic-plus-quartic test family with analytic derivatives."""
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float).reshape(-1)
    center = np.asarray(center, dtype=float).reshape(-1)
    kappa = float(kappa)

    def f(x):
        d = x - center
        return float(0.5 * x @ P @ x + q @ x + kappa * np.sum(d**4))

    def grad(x):
        d = x - center
        return P @ x + q + 4.0 * kappa * d**3

    def hess_vec(x, u):
        d = x - center
        return P @ u + 12.0 * kappa * (d**2) * u

    return Cost(f, grad, hess_vec, tag="quadratic_quartic")


@dataclass(frozen=True)
class SolverParams:
    grad_tol: float = 1e-9
    hess_tol: float = 1e-7
    max_iters: int = 5000
    perturbation: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if min(self.grad_tol, self.hess_tol, self.perturbation) <= 0 or self.max_iters <= 0:
            raise InvalidInput("solver parameters must be positive")


def g_value(lift, y, cost):
    return cost.f(lc.value(lift, y, validate=False))


def grad_g(lift, y, cost, pt=None):
    """Riemannian gradient of f(phi(.)) in tangent-basis coordinates."""
    pt = pt or lc.LiftPoint(lift, y)
    return pt.L.T @ cost.grad(pt.x)


def hess_g(lift, y, cost, pt=None):
    """Matrix of the Riemannian Hessian of f(phi(.)) in the tangent basis."""
    pt = pt or lc.LiftPoint(lift, y)
    gf = cost.grad(pt.x)
    d = pt.dim
    h1 = np.empty((d, d))
    hl = np.column_stack([cost.hess_vec(pt.x, pt.L[:, j]) for j in range(d)])
    h1 = pt.L.T @ hl
    h2 = np.einsum("aij,a->ij", pt.bilinear, gf)
    H = 0.5 * (h1 + h1.T) + h2
    return 0.5 * (H + H.T)


def fd_validate(lift, cost, y, n_dirs=3, seed=0, pt=None):
    """Finite-difference consistency report for grad_g and hess_g.

    Residual decay slopes are fit over the decreasing prefix of the step grid
    (roundoff floors the second differences below ~1e-4 steps in float64).
    """
    pt = pt or lc.LiftPoint(lift, y)
    rng = np.random.default_rng(seed)
    grad = grad_g(lift, y, cost, pt)
    H = hess_g(lift, y, cost, pt)
    ts = np.array([1e-2, 1e-3, 1e-4, 1e-5])
    grad_slopes, hess_slopes = [], []
    grad_err_h3, hess_err_h3 = 0.0, 0.0
    g0 = g_value(lift, y, cost)
    for _ in range(n_dirs):
        c = rng.standard_normal(pt.dim)
        c /= np.linalg.norm(c)
        v = pt.basis @ c
        u = mf.second_order_correction(lift.manifold, pt.y, v)
        d1 = float(grad @ c)
        d2 = float(c @ H @ c)

        def g_at(t):
            return cost.f(lc.value(lift, mf.curve(lift.manifold, pt.y, v, u, t), validate=False))

        r1 = [abs((g_at(t) - g_at(-t)) / (2.0 * t) - d1) for t in ts]
        r2 = [abs((g_at(t) - 2.0 * g0 + g_at(-t)) / (t * t) - d2) for t in ts]
        grad_slopes.append(nx.loglog_decay_slope(ts, r1, floor=1e-13))
        hess_slopes.append(nx.loglog_decay_slope(ts, r2, floor=1e-11))
        h = 1e-3
        scale1 = max(1.0, abs(d1))
        scale2 = max(1.0, abs(d2))
        grad_err_h3 = max(grad_err_h3, abs((g_at(h) - g_at(-h)) / (2.0 * h) - d1) / scale1)
        hess_err_h3 = max(hess_err_h3, abs((g_at(h) - 2.0 * g0 + g_at(-h)) / (h * h) - d2) / scale2)
    return {
        "grad_slope": float(min(grad_slopes)),
        "hess_slope": float(min(hess_slopes)),
        "grad_rel_err_1e3": float(grad_err_h3),
        "hess_rel_err_1e3": float(hess_err_h3),
        "grad_ok": bool(min(grad_slopes) >= 1.9),
        "hess_ok": bool(min(hess_slopes) >= 0.9),
    }


def _armijo_step(lift, cost, y, direction, slope, g0, t0=1.0, shrink=0.5, c1=1e-4, max_back=40):
    man = lift.manifold
    u = mf.second_order_correction(man, y, direction)
    t = t0
    for _ in range(max_back):
        y_new = mf.curve(man, y, direction, u, t)
        if cost.f(lc.value(lift, y_new, validate=False)) <= g0 + c1 * t * slope:
            return y_new, t
        t *= shrink
    return None, 0.0


def find_second_order_point(lift, cost, y0, params=SolverParams()):
    """Descend to an approximate second-order stationary point of f(phi(.)).

    Returns (y, certificates) with the gradient norm and smallest Hessian
    eigenvalue at y; raises NotConverged (carrying the best iterate) if the
    iteration budget runs out. Deterministic for fixed inputs.
    """
    y = mf.check_point(lift.manifold, np.asarray(y0, dtype=float).reshape(-1))
    step_memory = 1.0
    history = []
    for it in range(params.max_iters):
        pt = lc.LiftPoint(lift, y, validate=False)
        g0 = cost.f(pt.x)
        grad = pt.L.T @ cost.grad(pt.x)
        gnorm = float(np.linalg.norm(grad))
        record = {"iter": it, "g": float(g0), "grad_norm": gnorm}
        if gnorm > params.grad_tol:
            d = -(pt.basis @ grad) / gnorm
            y_new, t = _armijo_step(lift, cost, y, d, -gnorm, g0, t0=min(4.0 * step_memory, 1e3))
            if y_new is None:
                record["min_eig"] = None
                history.append(record)
                break
            step_memory = max(t, 1e-12)
            history.append(record)
            y = y_new
            continue
        H = hess_g(lift, y, cost, pt)
        evals, evecs = nx.sym_eig(H)
        record["min_eig"] = float(evals[0])
        history.append(record)
        if evals[0] >= -params.hess_tol:
            certs = {
                "grad_norm": gnorm,
                "hess_min_eig": float(evals[0]),
                "iterations": it,
                "g": float(g0),
                "converged": True,
                "trace": history,
            }
            return y, certs
        d = pt.basis @ evecs[:, 0]
        best = None
        for sgn in (1.0, -1.0):
            cand, t = _armijo_step(lift, cost, y, sgn * d, -0.25 * abs(evals[0]), g0, t0=1.0, c1=0.5)
            if cand is not None:
                val = cost.f(lc.value(lift, cand, validate=False))
                if best is None or val < best[0]:
                    best = (val, cand)
        if best is None:
            break
        y = best[1]
    pt = lc.LiftPoint(lift, y, validate=False)
    grad = pt.L.T @ cost.grad(pt.x)
    evals, _ = nx.sym_eig(hess_g(lift, y, cost, pt))
    best_cert = {
        "grad_norm": float(np.linalg.norm(grad)),
        "hess_min_eig": float(evals[0]),
        "iterations": params.max_iters,
        "g": float(cost.f(pt.x)),
        "converged": False,
        "trace": history,
    }
    raise NotConverged("iteration budget exhausted", best=(y, best_cert))


def downstream_stationarity(lift, cost, y, cone):
    """Stationarity gap of the image point for the given cost."""
    x = lc.value(lift, y, validate=False)
    return cn.stationarity_gap(cone, cost.grad(x))


def projected_gradient_simplex(cost, n, iters=4000, x0=None):
    """Projected-gradient baseline for convex costs over the simplex."""
    x = np.full(n, 1.0 / n) if x0 is None else np.asarray(x0, dtype=float)
    step = 1.0
    fx = cost.f(x)
    for _ in range(iters):
        g = cost.grad(x)
        x_new, f_new = x, fx
        while step > 1e-14:
            x_new = cn.project_simplex(x - step * g)
            f_new = cost.f(x_new)
            if f_new <= fx - (1e-4 / max(step, 1e-14)) * float(np.sum((x_new - x) ** 2)):
                break
            step *= 0.5
        if np.linalg.norm(x_new - x) <= 1e-14:
            break
        x, fx = x_new, f_new
        step = min(step * 2.0, 1e3)
    return x, fx
