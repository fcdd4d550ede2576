"""Discrete Christoffel sampling measure on a buffer-zone grid.

The measure assigns each grid point the probability p_k proportional to
the squared norm of the k-th row of Q from the grid orthonormalization,
which concentrates samples where the basis has mass. Regression weights
are the reciprocal density w_k = 1/(m_d p_k) by default; the literal
density itself is available behind weight_mode="literal" for comparison.
"""
import numpy as np

from .errors import DegeneratePointError, InfeasibleDrawError


class ChristoffelMeasure:
    """Sampling probabilities and regression weights on a discrete grid."""

    def __init__(self, grid, probabilities, weights, orth):
        self.grid = grid
        self.probabilities = probabilities
        self.weights = weights
        self.orth = orth
        self.n_basis = orth.indices.shape[0]

    @property
    def size(self):
        return self.grid.shape[0]


def build_christoffel_measure(orth, weight_mode="reciprocal"):
    """Turn a GridOrthonormalization into a sampling measure.

    p_k = (sum_j q_kj^2) / N, normalized to sum to 1 (the normalization
    is a no-op up to rounding since the columns of Q are unit vectors).
    """
    q = orth.Q
    m_d, n_basis = q.shape
    mass = np.sum(q * q, axis=1)
    if np.any(mass == 0.0):
        k = int(np.argmin(mass))
        raise DegeneratePointError(
            f"grid point {k} carries zero basis mass and can never be drawn"
        )
    p = mass / n_basis
    p = p / p.sum()
    if weight_mode == "reciprocal":
        w = 1.0 / (m_d * p)
    elif weight_mode == "literal":
        w = m_d * p
    else:
        raise ValueError(f"unknown weight_mode {weight_mode!r}")
    return ChristoffelMeasure(orth.grid, p, w, orth)


def draw_samples(measure, m, rng, with_replacement=False):
    """Draw m grid indices from the categorical distribution p.

    Default is without replacement (duplicates are rejected and redrawn);
    every accepted sample costs one expensive model evaluation, so
    repeats would waste budget. with_replacement=True gives the plain
    i.i.d. draw, used by the frequency tests.
    """
    p = measure.probabilities
    if with_replacement:
        return rng.choice(p.shape[0], size=m, replace=True, p=p)
    support = int(np.count_nonzero(p))
    if m > support:
        raise InfeasibleDrawError(
            f"cannot draw {m} distinct points from a measure with "
            f"{support} reachable points"
        )
    chosen = []
    seen = set()
    while len(chosen) < m:
        k = int(rng.choice(p.shape[0], p=p))
        if k not in seen:
            seen.add(k)
            chosen.append(k)
    return np.array(chosen, dtype=np.int64)
