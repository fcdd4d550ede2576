"""Multivariate orthonormal Legendre bases on [-1, 1]^d.

Index sets use hyperbolic-cross truncation by default (total-degree is
available for experimentation), evaluation goes through the kernels
package, and expansions are represented by PceSurrogate, optionally with
an upper-triangular change of basis attached.
"""
import numpy as np
from scipy.linalg import solve_triangular

from . import _kernels
from .errors import DomainViolationError, ResourceLimitError

# the whole pipeline works on the normalized box [-1, 1]^d
BOX_LOWER = -1.0
BOX_UPPER = 1.0

INDEX_CAP = 10_000


def as_points(x, d=None):
    """Coerce x to a (m, d) float array; 1-D input is treated as d = 1."""
    pts = np.asarray(x, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ValueError(f"points must be a (m, d) array, got shape {pts.shape}")
    if d is not None and pts.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got {pts.shape[1]}")
    return pts


def check_in_box(points):
    """Raise DomainViolationError if any coordinate leaves [-1, 1]."""
    worst = np.max(np.abs(points)) if points.size else 0.0
    if worst > BOX_UPPER:
        i = int(np.argmax(np.max(np.abs(points), axis=1)))
        raise DomainViolationError(
            f"point {points[i]} lies outside [{BOX_LOWER}, {BOX_UPPER}]^{points.shape[1]}"
        )


def hyperbolic_cross_indices(d, n, cap=INDEX_CAP):
    """Multi-indices with prod_k (n_k + 1) <= n + 1, graded lexicographic.

    Returns an (N, d) int64 array. Raises ResourceLimitError when the set
    would exceed cap entries.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if n < 0:
        raise ValueError("n must be >= 0")
    found = []

    def rec(prefix, prod):
        if len(found) > cap:
            raise ResourceLimitError(
                f"hyperbolic cross (d={d}, n={n}) exceeds the cap of {cap} indices"
            )
        if len(prefix) == d:
            found.append(tuple(prefix))
            return
        k = 0
        while prod * (k + 1) <= n + 1:
            rec(prefix + [k], prod * (k + 1))
            k += 1

    rec([], 1)
    if len(found) > cap:
        raise ResourceLimitError(
            f"hyperbolic cross (d={d}, n={n}) exceeds the cap of {cap} indices"
        )
    found.sort(key=lambda t: (sum(t), t))
    return np.array(found, dtype=np.int64)


def total_degree_indices(d, n, cap=INDEX_CAP):
    """Multi-indices with sum_k n_k <= n, graded lexicographic."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if n < 0:
        raise ValueError("n must be >= 0")
    from math import comb

    if comb(n + d, d) > cap:
        raise ResourceLimitError(
            f"total degree (d={d}, n={n}) exceeds the cap of {cap} indices"
        )
    found = []

    def rec(prefix, total):
        if len(prefix) == d:
            found.append(tuple(prefix))
            return
        for k in range(n - total + 1):
            rec(prefix + [k], total + k)

    rec([], 0)
    found.sort(key=lambda t: (sum(t), t))
    return np.array(found, dtype=np.int64)


def index_set(d, n, rule="hyperbolic", cap=INDEX_CAP):
    """Dispatch on the truncation rule: "hyperbolic" or "total"."""
    if rule == "hyperbolic":
        return hyperbolic_cross_indices(d, n, cap=cap)
    if rule == "total":
        return total_degree_indices(d, n, cap=cap)
    raise ValueError(f"unknown index rule {rule!r}")


def index_count(d, n, rule="hyperbolic"):
    return index_set(d, n, rule=rule).shape[0]


def eval_legendre_1d(order, x):
    """Single orthonormal Legendre value phi_order(x), normalized on dx/2."""
    if order < 0:
        raise ValueError("order must be >= 0")
    table = _kernels.legendre_table(np.array([float(x)]), order)
    return float(table[0, order])


def basis_matrix(indices, points):
    """Psi with entries prod_k phi_{indices[j,k]}(points[i,k]), shape (m, N).

    Points must lie in the box; violations raise DomainViolationError.
    """
    indices = np.asarray(indices, dtype=np.int64)
    pts = as_points(points, indices.shape[1])
    check_in_box(pts)
    nmax = int(indices.max()) if indices.size else 0
    tables = [_kernels.legendre_table(pts[:, k], nmax) for k in range(pts.shape[1])]
    out = np.ones((pts.shape[0], indices.shape[0]))
    for k in range(pts.shape[1]):
        out *= tables[k][:, indices[:, k]]
    return out


class PceSurrogate:
    """Polynomial expansion sum_j c_j phi_j over [-1, 1]^d.

    With transform=None the phi_j are the tensor Legendre polynomials
    themselves. Otherwise transform is the upper-triangular R of a grid
    orthonormalization and phi_j = (Psi R^{-1})_j; evaluation keeps the
    triangular solve instead of folding R^{-1} into the coefficients,
    which would cancel catastrophically for nearly singular R.
    """

    def __init__(self, indices, coefficients, transform=None):
        self.indices = np.asarray(indices, dtype=np.int64)
        self.coefficients = np.asarray(coefficients, dtype=np.float64)
        if self.coefficients.shape[0] != self.indices.shape[0]:
            raise ValueError("coefficient count does not match the index set")
        self.transform = transform
        self.d = int(self.indices.shape[1])

    @property
    def n_terms(self):
        return self.indices.shape[0]

    def evaluate(self, points, chunk=262_144):
        pts = as_points(points, self.d)
        out = np.empty(pts.shape[0])
        for start in range(0, pts.shape[0], chunk):
            block = pts[start:start + chunk]
            if self.transform is None:
                check_in_box(block)
                out[start:start + chunk] = _kernels.pce_eval(
                    block, self.indices, self.coefficients
                )
            else:
                psi = basis_matrix(self.indices, block)
                phi = solve_triangular(self.transform.T, psi.T, lower=True).T
                out[start:start + chunk] = phi @ self.coefficients
        return out

    __call__ = evaluate
