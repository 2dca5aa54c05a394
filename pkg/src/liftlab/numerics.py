"""Dense linear-algebra kernels and the tolerance policy shared by all modules.

Everything operates on plain float64 numpy arrays and is pure. All subspace
bases returned here are orthonormal, so subspace comparisons elsewhere go
through projectors rather than raw basis matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput


def require_finite(name, a):
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return a


def as_matrix(name, a):
    a = require_finite(name, a)
    if a.ndim != 2:
        raise InvalidInput(f"{name} must be a 2-d array, got ndim={a.ndim}")
    return a


@dataclass(frozen=True)
class TolerancePolicy:
    """Shared numerical tolerances.

    The rank cutoff scales as rank_tol_factor * (largest singular value) *
    (max dimension); psd_tol and zero_tol are absolute.
    """

    rank_tol_factor: float = 1e-10
    psd_tol: float = 1e-9
    zero_tol: float = 1e-11

    def __post_init__(self):
        if min(self.rank_tol_factor, self.psd_tol, self.zero_tol) <= 0:
            raise InvalidInput("all tolerances must be positive")

    def rank_cutoff(self, singular_values, shape):
        s = np.asarray(singular_values, dtype=float)
        top = float(s[0]) if s.size else 0.0
        return self.rank_tol_factor * top * max(shape)


DEFAULT_TOL = TolerancePolicy()


def svd(a):
    """Thin SVD with descending singular values: a = u @ diag(s) @ v.T."""
    a = as_matrix("a", a)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return u, s, vh.T


def numerical_rank(a, tol=DEFAULT_TOL):
    a = as_matrix("a", a)
    if min(a.shape) == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > tol.rank_cutoff(s, a.shape)))


def range_basis(a, tol=DEFAULT_TOL):
    """Orthonormal columns spanning the image of a."""
    a = as_matrix("a", a)
    if min(a.shape) == 0:
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = int(np.sum(s > tol.rank_cutoff(s, a.shape)))
    return u[:, :r]


def kernel_basis(a, tol=DEFAULT_TOL):
    """Orthonormal columns spanning the null space of a."""
    a = as_matrix("a", a)
    n = a.shape[1]
    if min(a.shape) == 0:
        return np.eye(n)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    r = int(np.sum(s > tol.rank_cutoff(s, a.shape)))
    return vh[r:].T


def pinv(a, tol=DEFAULT_TOL):
    a = as_matrix("a", a)
    if min(a.shape) == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    cut = tol.rank_cutoff(s, a.shape)
    inv = np.where(s > cut, 1.0 / np.where(s > cut, s, 1.0), 0.0)
    return (vh.T * inv) @ u.T


def sym_eig(s):
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    s = as_matrix("s", s)
    if s.shape[0] != s.shape[1]:
        raise InvalidInput(f"matrix must be square, got {s.shape}")
    sym = 0.5 * (s + s.T)
    w, v = np.linalg.eigh(sym)
    return w, v


def min_norm_solve(a, b, tol=DEFAULT_TOL):
    """Least-norm x minimizing ||a @ x - b||."""
    a = as_matrix("a", a)
    b = require_finite("b", b).reshape(-1)
    if a.shape[0] != b.shape[0]:
        raise InvalidInput(f"incompatible shapes {a.shape} and {b.shape}")
    return pinv(a, tol) @ b


def orthonormalize(a, tol=DEFAULT_TOL):
    """Orthonormal basis for the column span of a (alias of range_basis)."""
    return range_basis(a, tol)


def projector(basis):
    """Orthogonal projector onto the span of an orthonormal basis."""
    basis = as_matrix("basis", basis)
    return basis @ basis.T


def project_onto(basis, v):
    basis = as_matrix("basis", basis)
    v = require_finite("v", v).reshape(-1)
    return basis @ (basis.T @ v)


def subspace_distance(basis_a, basis_b):
    """Spectral norm of the projector difference between two subspaces."""
    pa = projector(basis_a)
    pb = projector(basis_b)
    if pa.shape != pb.shape:
        raise InvalidInput("subspaces live in different ambient dimensions")
    return float(np.linalg.norm(pa - pb, 2))


def subspaces_equal(basis_a, basis_b, atol=1e-8):
    return subspace_distance(basis_a, basis_b) <= atol


def loglog_decay_slope(ts, residuals, floor=1e-14):
    """Least-squares slope of log(residual) against log(t).

    Only the longest prefix (in decreasing t) of strictly decreasing residuals
    above the floating-point floor enters the fit; once residuals saturate at
    roundoff they carry no scaling information. Returns inf when every
    residual is below the floor (the expansion is exact to working precision).
    """
    ts = np.asarray(ts, dtype=float)
    rs = np.asarray(residuals, dtype=float)
    order = np.argsort(-ts)
    ts, rs = ts[order], rs[order]
    if np.all(rs <= floor):
        return np.inf
    keep = [0]
    for i in range(1, len(ts)):
        if rs[i] <= floor or rs[i] >= rs[keep[-1]]:
            break
        keep.append(i)
    if len(keep) < 2:
        return 0.0
    x = np.log(ts[keep])
    y = np.log(rs[keep])
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)
