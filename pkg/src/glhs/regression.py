"""Least-squares fitting of polynomial expansions.

Covers the plain fit for the global surrogate, QR orthonormalization of a
basis restricted to a discrete grid, the Christoffel-weighted local fit,
and K-fold cross-validation over the polynomial order.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .basis import PceSurrogate, as_points, basis_matrix, index_set
from .errors import IllPosedFitError, NeedsMoreSamplesError

log = logging.getLogger(__name__)

# relative margin below which CV scores count as tied (resolved to the
# lower order, keeping selection stable across platforms)
CV_TIE_RTOL = 1e-12


def least_squares_fit(psi, y):
    """Solve argmin_c ||psi c - y||_2; returns (c, residual_norm).

    Raises IllPosedFitError when psi is numerically rank deficient.
    """
    psi = np.asarray(psi, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if psi.shape[0] < psi.shape[1]:
        raise IllPosedFitError(
            f"need at least {psi.shape[1]} rows to fit {psi.shape[1]} coefficients, "
            f"got {psi.shape[0]}",
            rank=psi.shape[0],
            required=psi.shape[1],
        )
    coef, _, rank, _ = np.linalg.lstsq(psi, y, rcond=None)
    if rank < psi.shape[1]:
        raise IllPosedFitError(
            f"design matrix has numerical rank {rank}, need {psi.shape[1]}",
            rank=int(rank),
            required=psi.shape[1],
        )
    residual = float(np.linalg.norm(psi @ coef - y))
    return coef, residual


@dataclass
class GridOrthonormalization:
    """Economy QR of B = Psi/sqrt(m_d) on a discrete grid.

    The columns of Q are orthonormal, so the polynomials phi = psi R^{-1}
    are orthonormal under the uniform measure on the grid.
    """

    indices: np.ndarray
    grid: np.ndarray
    Q: np.ndarray
    R: np.ndarray


def orthonormalize_on_grid(indices, grid):
    """Orthonormalize the basis on a grid; raises NeedsMoreSamplesError when
    the grid cannot support the basis (too few points or rank deficient)."""
    indices = np.asarray(indices, dtype=np.int64)
    grid = as_points(grid, indices.shape[1])
    n_basis = indices.shape[0]
    m_d = grid.shape[0]
    if m_d < n_basis:
        raise NeedsMoreSamplesError(
            f"grid of {m_d} points cannot orthonormalize {n_basis} basis functions",
            rank=m_d,
            required=n_basis,
        )
    b = basis_matrix(indices, grid) / np.sqrt(m_d)
    rank = int(np.linalg.matrix_rank(b))
    if rank < n_basis:
        raise NeedsMoreSamplesError(
            f"basis matrix on the grid has numerical rank {rank}, need {n_basis}",
            rank=rank,
            required=n_basis,
        )
    q, r = np.linalg.qr(b)
    return GridOrthonormalization(indices=indices, grid=grid, Q=q, R=r)


def weighted_least_squares_fit(points, y, weights, orth):
    """Weighted fit in the orthonormalized basis phi = psi R^{-1}.

    Design rows are sqrt(w_i/m) phi_j(x_i). Returns a PceSurrogate that
    carries the transform, so it evaluates anywhere in the box.
    """
    from scipy.linalg import solve_triangular

    points = as_points(points, orth.indices.shape[1])
    y = np.asarray(y, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights <= 0):
        raise ValueError("all regression weights must be positive")
    m = y.shape[0]
    psi = basis_matrix(orth.indices, points)
    phi = solve_triangular(orth.R.T, psi.T, lower=True).T
    scale = np.sqrt(weights / m)
    a = scale[:, None] * phi
    b = scale * y
    coef, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < orth.indices.shape[0]:
        raise IllPosedFitError(
            f"weighted design matrix has numerical rank {rank}, "
            f"need {orth.indices.shape[0]}",
            rank=int(rank),
            required=orth.indices.shape[0],
        )
    return PceSurrogate(orth.indices, coef, transform=orth.R)


@dataclass
class CvSelection:
    order: int
    scores: dict = field(default_factory=dict)
    skipped: dict = field(default_factory=dict)


def cross_validate_order(points, y, weights, n_max, zone_grid, rng,
                         k_folds=5, index_rule="hyperbolic"):
    """Pick the polynomial order in 1..n_max by K-fold cross-validation.

    Each candidate order gets its own index set, orthonormalized on the
    zone grid; the score is the mean squared validation error over all
    held-out points. Ties and near-ties resolve to the lower order. Fold
    assignment comes from the supplied rng, so the selection is
    reproducible from the run seed.
    """
    points = as_points(points)
    y = np.asarray(y, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    m = y.shape[0]
    perm = rng.permutation(m)
    folds = np.array_split(perm, k_folds)
    scores = {}
    skipped = {}
    for order in range(1, n_max + 1):
        indices = index_set(points.shape[1], order, rule=index_rule)
        n_basis = indices.shape[0]
        try:
            orth = orthonormalize_on_grid(indices, zone_grid)
        except NeedsMoreSamplesError as exc:
            skipped[order] = str(exc)
            continue
        errs = []
        reason = None
        for fold in folds:
            train = np.setdiff1d(perm, fold)
            if train.shape[0] < n_basis:
                reason = (
                    f"fold leaves {train.shape[0]} training points, "
                    f"need {n_basis}"
                )
                break
            try:
                sur = weighted_least_squares_fit(
                    points[train], y[train], weights[train], orth
                )
            except IllPosedFitError as exc:
                reason = str(exc)
                break
            pred = sur(points[fold])
            errs.extend((pred - y[fold]) ** 2)
        if reason is not None:
            skipped[order] = reason
            log.debug("cv: order %d skipped (%s)", order, reason)
            continue
        scores[order] = float(np.mean(errs))
    if not scores:
        raise NeedsMoreSamplesError(
            f"cross-validation skipped every order 1..{n_max}: {skipped}"
        )
    best = None
    for order in sorted(scores):
        if best is None or scores[order] < scores[best] * (1 - CV_TIE_RTOL):
            best = order
    return CvSelection(order=best, scores=scores, skipped=skipped)
