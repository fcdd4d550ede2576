"""Index sets, basis evaluation, and the expansion container."""
import itertools
import math

import numpy as np
import pytest

from glhs.basis import (
    PceSurrogate,
    as_points,
    basis_matrix,
    check_in_box,
    eval_legendre_1d,
    hyperbolic_cross_indices,
    index_count,
    index_set,
    total_degree_indices,
)
from glhs.errors import DomainViolationError, ResourceLimitError


def brute_force_hc(d, n):
    out = [
        t for t in itertools.product(range(n + 1), repeat=d)
        if math.prod(k + 1 for k in t) <= n + 1
    ]
    out.sort(key=lambda t: (sum(t), t))
    return np.array(out, dtype=np.int64)


def test_known_index_counts():
    assert index_count(1, 3) == 4
    assert index_count(2, 3) == 8
    assert index_count(2, 4) == 10
    assert index_count(4, 3) == 19


def test_hyperbolic_cross_2d_order_2_exact_set():
    got = hyperbolic_cross_indices(2, 2)
    expected = np.array(
        [[0, 0], [0, 1], [1, 0], [0, 2], [2, 0]], dtype=np.int64
    )
    assert np.array_equal(got, expected)


def test_hyperbolic_cross_excludes_mixed_term_below_order_3():
    # (1,1) costs (1+1)(1+1) = 4, admitted only once n+1 >= 4
    assert not any((t == [1, 1]).all() for t in hyperbolic_cross_indices(2, 2))
    assert any((t == [1, 1]).all() for t in hyperbolic_cross_indices(2, 3))


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("n", [0, 1, 2, 3, 4, 5, 6])
def test_hyperbolic_cross_matches_brute_force(d, n):
    assert np.array_equal(hyperbolic_cross_indices(d, n), brute_force_hc(d, n))


@pytest.mark.parametrize("d,n", [(2, 4), (3, 5), (4, 3)])
def test_hyperbolic_cross_downward_closed(d, n):
    entries = {tuple(t) for t in hyperbolic_cross_indices(d, n)}
    for t in entries:
        for k in range(d):
            if t[k] > 0:
                lower = t[:k] + (t[k] - 1,) + t[k + 1:]
                assert lower in entries


def test_graded_lex_ordering_is_monotone_in_total_degree():
    idx = hyperbolic_cross_indices(3, 4)
    totals = idx.sum(axis=1)
    assert np.all(np.diff(totals) >= 0)


def test_total_degree_rule():
    got = total_degree_indices(2, 2)
    assert got.shape == (6, 2)
    assert any((t == [1, 1]).all() for t in got)
    assert np.array_equal(index_set(2, 2, rule="total"), got)


def test_index_set_rejects_unknown_rule():
    with pytest.raises(ValueError):
        index_set(2, 2, rule="sparse")


def test_index_cap_enforced():
    with pytest.raises(ResourceLimitError):
        hyperbolic_cross_indices(2, 4, cap=5)
    with pytest.raises(ResourceLimitError):
        hyperbolic_cross_indices(1, 10_000)
    with pytest.raises(ResourceLimitError):
        total_degree_indices(6, 11)  # C(17, 6) = 12376 > 10000


def test_index_set_input_validation():
    with pytest.raises(ValueError):
        hyperbolic_cross_indices(0, 2)
    with pytest.raises(ValueError):
        hyperbolic_cross_indices(2, -1)


def test_as_points_promotes_1d():
    pts = as_points(np.array([0.1, 0.2]))
    assert pts.shape == (2, 1)
    with pytest.raises(ValueError):
        as_points(np.zeros((2, 3)), d=2)
    with pytest.raises(ValueError):
        as_points(np.zeros((2, 2, 2)))


def test_check_in_box():
    check_in_box(np.array([[1.0, -1.0]]))
    with pytest.raises(DomainViolationError):
        check_in_box(np.array([[0.0, 1.0001]]))


def test_eval_legendre_1d_values():
    assert eval_legendre_1d(0, 0.3) == 1.0
    assert eval_legendre_1d(2, 1.0) == pytest.approx(np.sqrt(5), rel=1e-15)
    with pytest.raises(ValueError):
        eval_legendre_1d(-1, 0.0)


def test_basis_matrix_values_1d():
    psi = basis_matrix(np.array([[0], [1]]), np.array([[0.5]]))
    assert np.allclose(psi, [[1.0, np.sqrt(3) * 0.5]], rtol=1e-15)


def test_basis_matrix_tensor_product():
    pts = np.array([[0.3, -0.7]])
    psi = basis_matrix(np.array([[2, 1]]), pts)
    expected = eval_legendre_1d(2, 0.3) * eval_legendre_1d(1, -0.7)
    assert psi[0, 0] == pytest.approx(expected, rel=1e-14)


def test_basis_matrix_rejects_outside_box():
    with pytest.raises(DomainViolationError):
        basis_matrix(np.array([[0], [1]]), np.array([[1.5]]))


def test_surrogate_coefficient_shape_checked():
    with pytest.raises(ValueError):
        PceSurrogate(np.array([[0], [1]]), np.array([1.0]))


def test_surrogate_evaluation_chunk_invariant():
    rng = np.random.default_rng(11)
    indices = hyperbolic_cross_indices(2, 3)
    sur = PceSurrogate(indices, rng.standard_normal(indices.shape[0]))
    pts = rng.uniform(-1, 1, (1000, 2))
    full = sur.evaluate(pts)
    assert np.array_equal(full, sur.evaluate(pts, chunk=7))
    assert np.array_equal(full, sur(pts))


def test_surrogate_matches_basis_matrix():
    rng = np.random.default_rng(4)
    indices = hyperbolic_cross_indices(2, 4)
    coef = rng.standard_normal(indices.shape[0])
    sur = PceSurrogate(indices, coef)
    pts = rng.uniform(-1, 1, (200, 2))
    assert np.allclose(sur(pts), basis_matrix(indices, pts) @ coef,
                       rtol=1e-12, atol=1e-14)
