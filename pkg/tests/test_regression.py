"""Least-squares fits, grid orthonormalization, and CV order selection."""
import numpy as np
import pytest

from glhs.basis import PceSurrogate, basis_matrix, hyperbolic_cross_indices
from glhs.errors import IllPosedFitError, NeedsMoreSamplesError
from glhs.regression import (
    cross_validate_order,
    least_squares_fit,
    orthonormalize_on_grid,
    weighted_least_squares_fit,
)


def test_exact_polynomial_recovery():
    rng = np.random.default_rng(0)
    indices = hyperbolic_cross_indices(2, 3)
    coef = rng.standard_normal(indices.shape[0])
    pts = rng.uniform(-1, 1, (200, 2))
    y = basis_matrix(indices, pts) @ coef
    got, residual = least_squares_fit(basis_matrix(indices, pts), y)
    assert np.max(np.abs(got - coef)) / np.max(np.abs(coef)) < 1e-9
    assert residual < 1e-9


def test_least_squares_requires_enough_rows():
    with pytest.raises(IllPosedFitError) as err:
        least_squares_fit(np.ones((2, 3)), np.zeros(2))
    assert err.value.required == 3


def test_least_squares_detects_rank_deficiency():
    col = np.linspace(-1, 1, 10)
    psi = np.column_stack([col, col])
    with pytest.raises(IllPosedFitError) as err:
        least_squares_fit(psi, col)
    assert err.value.rank == 1


def test_grid_orthonormalization_q_is_orthonormal():
    rng = np.random.default_rng(1)
    indices = hyperbolic_cross_indices(2, 3)
    grid = rng.uniform(-1, 1, (2000, 2))
    orth = orthonormalize_on_grid(indices, grid)
    gram = orth.Q.T @ orth.Q
    assert np.max(np.abs(gram - np.eye(indices.shape[0]))) < 1e-10
    # R reproduces B: Q R = Psi / sqrt(m_d)
    b = basis_matrix(indices, grid) / np.sqrt(grid.shape[0])
    assert np.allclose(orth.Q @ orth.R, b, atol=1e-12)


def test_orthonormalization_needs_enough_points():
    indices = hyperbolic_cross_indices(2, 3)
    with pytest.raises(NeedsMoreSamplesError):
        orthonormalize_on_grid(indices, np.zeros((4, 2)))


def test_orthonormalization_detects_degenerate_grid():
    indices = hyperbolic_cross_indices(2, 2)
    grid = np.tile([[0.2, 0.4]], (50, 1))
    with pytest.raises(NeedsMoreSamplesError) as err:
        orthonormalize_on_grid(indices, grid)
    assert err.value.required == indices.shape[0]


def test_weighted_fit_with_unit_weights_matches_plain_lstsq():
    rng = np.random.default_rng(2)
    indices = hyperbolic_cross_indices(1, 3)
    grid = rng.uniform(-1, 1, (500, 1))
    orth = orthonormalize_on_grid(indices, grid)
    pts = rng.uniform(-1, 1, (40, 1))
    y = np.sin(2 * pts[:, 0])
    sur = weighted_least_squares_fit(pts, y, np.ones(40), orth)
    psi = basis_matrix(indices, pts)
    coef, _ = least_squares_fit(psi, y)
    plain = PceSurrogate(indices, coef)
    probe = rng.uniform(-1, 1, (100, 1))
    assert np.allclose(sur(probe), plain(probe), rtol=1e-10, atol=1e-12)


def test_weighted_fit_exact_recovery_through_transform():
    rng = np.random.default_rng(3)
    indices = hyperbolic_cross_indices(2, 3)
    grid = rng.uniform(-1, 1, (3000, 2))
    orth = orthonormalize_on_grid(indices, grid)
    coef = rng.standard_normal(indices.shape[0])
    target = PceSurrogate(indices, coef)
    pts = rng.uniform(-1, 1, (60, 2))
    weights = rng.uniform(0.5, 2.0, 60)
    sur = weighted_least_squares_fit(pts, target(pts), weights, orth)
    probe = rng.uniform(-1, 1, (200, 2))
    ref = target(probe)
    assert np.max(np.abs(sur(probe) - ref)) / np.max(np.abs(ref)) < 1e-9


def test_weighted_fit_on_grid_equals_scaled_q():
    # phi = Psi R^{-1} must equal sqrt(m_d) Q at the grid points
    rng = np.random.default_rng(4)
    indices = hyperbolic_cross_indices(1, 2)
    grid = rng.uniform(-1, 1, (400, 1))
    orth = orthonormalize_on_grid(indices, grid)
    coef = np.array([1.0, -2.0, 0.5])
    sur = PceSurrogate(indices, coef, transform=orth.R)
    expected = np.sqrt(grid.shape[0]) * orth.Q @ coef
    assert np.allclose(sur(grid), expected, rtol=1e-10, atol=1e-12)


def test_weighted_fit_rejects_bad_weights():
    rng = np.random.default_rng(5)
    indices = hyperbolic_cross_indices(1, 1)
    grid = rng.uniform(-1, 1, (50, 1))
    orth = orthonormalize_on_grid(indices, grid)
    pts = rng.uniform(-1, 1, (10, 1))
    with pytest.raises(ValueError):
        weighted_least_squares_fit(pts, np.zeros(10), np.zeros(10), orth)


def test_cv_exact_tie_resolves_to_lowest_order(rng):
    # y identically zero scores every order exactly 0.0
    pts = rng.uniform(-1, 1, (40, 1))
    zone = rng.uniform(-1, 1, (500, 1))
    sel = cross_validate_order(pts, np.zeros(40), np.ones(40), 3, zone, rng)
    assert sel.order == 1
    assert set(sel.scores) == {1, 2, 3}
    assert all(s == 0.0 for s in sel.scores.values())


def test_cv_prefers_order_that_explains_the_data(rng):
    pts = rng.uniform(-1, 1, (60, 1))
    y = 2.0 * pts[:, 0] ** 3  # cubic, not representable below order 3
    zone = rng.uniform(-1, 1, (800, 1))
    sel = cross_validate_order(pts, y, np.ones(60), 3, zone, rng)
    assert sel.order == 3
    assert sel.scores[3] < sel.scores[1]


def test_cv_skips_orders_too_rich_for_the_folds(rng):
    # 6 samples, 5 folds: training sets of 4-5 points cannot support the
    # 2-D bases of 5 and 8 terms
    pts = rng.uniform(-1, 1, (6, 2))
    y = pts[:, 0]
    zone = rng.uniform(-1, 1, (2000, 2))
    sel = cross_validate_order(pts, y, np.ones(6), 3, zone, rng)
    assert sel.order == 1
    assert 2 in sel.skipped and 3 in sel.skipped
    assert "training points" in sel.skipped[3]


def test_cv_raises_when_every_order_is_skipped(rng):
    pts = rng.uniform(-1, 1, (3, 2))
    zone = rng.uniform(-1, 1, (2000, 2))
    with pytest.raises(NeedsMoreSamplesError):
        cross_validate_order(pts, np.zeros(3), np.ones(3), 3, zone, rng,
                             k_folds=3)


def test_cv_fold_assignment_reproducible():
    pts = np.random.default_rng(8).uniform(-1, 1, (40, 1))
    y = np.sin(3 * pts[:, 0])
    zone = np.random.default_rng(9).uniform(-1, 1, (500, 1))
    a = cross_validate_order(pts, y, np.ones(40), 3, zone,
                             np.random.default_rng(77))
    b = cross_validate_order(pts, y, np.ones(40), 3, zone,
                             np.random.default_rng(77))
    assert a.order == b.order
    assert a.scores == b.scores
