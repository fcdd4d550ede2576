"""Configuration, the hybrid chain, and the orchestrated loop."""
import numpy as np
import pytest

from glhs.basis import PceSurrogate, hyperbolic_cross_indices
from glhs.errors import InsufficientBudgetError
from glhs.glhs import (
    CountingFunction,
    GlhsConfig,
    HybridSurrogate,
    _eta_update,
    build_global_stage,
    compute_eta0,
    fit_global_surrogate,
    run_glhs,
    run_repetition,
)
from glhs.testcases import g1d, reference_case


def make_surrogate(coef, d=1, n=3):
    indices = hyperbolic_cross_indices(d, n)
    full = np.zeros(indices.shape[0])
    full[:len(coef)] = coef
    return PceSurrogate(indices, full)


class TestConfig:
    def test_defaults_validate(self):
        errors, warnings = GlhsConfig(d=1).validate()
        assert errors == [] and warnings == []

    def test_alpha_bounds(self):
        errors, _ = GlhsConfig(d=1, alpha=1.5).validate()
        assert any("α must lie in (0, 1]" in e for e in errors)
        errors, _ = GlhsConfig(d=1, alpha=0.0).validate()
        assert len(errors) == 1

    def test_narrow_buffer_warns(self):
        errors, warnings = GlhsConfig(d=1, c=0.5).validate()
        assert errors == []
        assert any("c = 0.5" in w for w in warnings)

    def test_global_budget_checked(self):
        errors, _ = GlhsConfig(d=2, n=4, m_0=5).validate()
        assert any("m_0" in e for e in errors)

    def test_explicit_m_l_must_cover_the_basis(self):
        errors, _ = GlhsConfig(d=2, n_max=3, m_0=40, m_l=7).validate()
        assert any("m_l" in e for e in errors)

    def test_errors_aggregate(self):
        errors, _ = GlhsConfig(d=1, alpha=2.0, c_r=0.5, cv_folds=1).validate()
        assert len(errors) == 3

    def test_sampling_rate_rule(self):
        assert GlhsConfig(d=2, n_max=3).resolved_m_l() == 32  # 4 * 8 terms
        assert GlhsConfig(d=1, n_max=3).resolved_m_l() == 16
        assert GlhsConfig(d=1, n_max=3, m_l=6).resolved_m_l() == 6

    def test_mode_names_validated(self):
        errors, _ = GlhsConfig(d=1, eta_mode="abs", weight_mode="x",
                               index_rule="y").validate()
        assert len(errors) == 3


def test_eta_update_modes():
    r = np.array([3.0, 4.0])
    assert _eta_update(r, "literal") == 5.0
    assert _eta_update(r, "rms") == pytest.approx(np.sqrt(12.5), rel=1e-15)
    assert _eta_update(r, "mse") == pytest.approx(12.5, rel=1e-15)
    with pytest.raises(ValueError):
        _eta_update(r, "sum")


def test_counting_function_counts_points():
    counting = CountingFunction(g1d)
    counting(np.zeros((7, 1)))
    counting(np.zeros((3, 1)))
    assert counting.count == 10


class TestHybridChain:
    def test_without_layers_is_the_global_model(self, rng):
        sur = make_surrogate([0.5, 1.0])
        chain = HybridSurrogate(sur)
        pts = rng.uniform(-1, 1, (50, 1))
        assert np.array_equal(chain(pts), sur(pts))

    def test_points_outside_the_buffer_are_untouched(self, rng):
        g = make_surrogate([0.0, 1.0])          # g(x) ~ sqrt(3) x
        local = make_surrogate([10.0])          # wildly different constant
        chain = HybridSurrogate(g, [(0.5, local)])
        pts = rng.uniform(-1, 1, (2000, 1))
        base = g(pts)
        out = chain(pts)
        outside = np.abs(base) > 0.5
        assert np.array_equal(out[outside], base[outside])
        assert np.all(out[~outside] == 10.0)

    def test_chain_matches_direct_recursion(self, rng):
        g = make_surrogate([0.2, 1.0, -0.3])
        locals_ = [make_surrogate([0.05, 0.8]), make_surrogate([0.01, 0.75])]
        etas = [0.6, 0.2]
        chain = HybridSurrogate(g, list(zip(etas, locals_)))

        def recursive(pts, level):
            if level == 0:
                return g(pts)
            prev = recursive(pts, level - 1)
            out = prev.copy()
            mask = np.abs(prev) <= etas[level - 1]
            if np.any(mask):
                out[mask] = locals_[level - 1](pts[mask])
            return out

        pts = rng.uniform(-1, 1, (1000, 1))
        assert np.array_equal(chain(pts), recursive(pts, 2))


class TestEta0:
    def test_linear_in_c(self, rng):
        x0 = rng.uniform(-1, 1, (20, 1))
        y0 = g1d(x0)
        sur = make_surrogate([0.5, -0.2, 0.1])
        one = compute_eta0(x0, y0, sur, 1.0, 0.8)
        two = compute_eta0(x0, y0, sur, 2.0, 0.8)
        assert two == 2.0 * one

    def test_perfect_surrogate_gives_zero(self, rng):
        sur = make_surrogate([0.5, -0.2, 0.1])
        x0 = rng.uniform(-1, 1, (20, 1))
        assert compute_eta0(x0, sur(x0), sur, 1.0, 0.8) == 0.0

    def test_alpha_filters_to_near_surface_points(self):
        x0 = np.array([[0.0], [0.5]])
        y0 = np.array([10.0, 1.0])
        sur = make_surrogate([0.0])             # residuals = |y0|
        # alpha=0.2: only the |y|=1 point counts
        assert compute_eta0(x0, y0, sur, 1.0, 0.2) == 1.0
        # alpha=1: the max-residual point dominates
        assert compute_eta0(x0, y0, sur, 1.0, 1.0) == 10.0

    def test_empty_filter_falls_back_to_all_points(self):
        x0 = np.array([[0.0], [0.5]])
        y0 = np.array([2.0, 2.0])
        sur = make_surrogate([0.0])
        # every |y| equals the max, so |y| <= 0.3 * max is empty
        assert compute_eta0(x0, y0, sur, 1.0, 0.3) == 2.0


def test_global_fit_requires_enough_evaluations():
    config = GlhsConfig(d=1, m_0=2, n=2)
    with pytest.raises(InsufficientBudgetError):
        fit_global_surrogate(g1d, config, np.random.default_rng(0))


def test_run_glhs_counts_every_model_call():
    ls, config = reference_case("case_1d")
    run = run_glhs(ls.fun, config, np.random.default_rng(7))
    expected = config.m_0 + config.m_l * len(run.iterations)
    assert run.m_T == expected
    assert run.terminated in ("empty-zone", "max-iterations")
    for diag in run.iterations:
        assert diag.points.shape == (config.m_l, 1)


def test_repetition_replay_is_bit_exact():
    ls, config = reference_case("case_1d")
    stage = build_global_stage(ls.fun, config, np.random.default_rng(3))
    reps = [
        run_repetition(ls.fun, stage, config, np.random.default_rng(11))
        for _ in range(2)
    ]
    a, b = reps
    assert a.m_T == b.m_T
    assert len(a.chain.layers) == len(b.chain.layers)
    for (eta_a, loc_a), (eta_b, loc_b) in zip(a.chain.layers, b.chain.layers):
        assert eta_a == eta_b
        assert np.array_equal(loc_a.coefficients, loc_b.coefficients)
    probe = np.random.default_rng(5).uniform(-1, 1, (5000, 1))
    assert np.array_equal(a.chain(probe), b.chain(probe))


def test_repetitions_leave_the_stage_untouched():
    ls, config = reference_case("case_1d")
    stage = build_global_stage(ls.fun, config, np.random.default_rng(3))
    before = stage.surrogate.coefficients.copy()
    first = run_repetition(ls.fun, stage, config, np.random.default_rng(1))
    second = run_repetition(ls.fun, stage, config, np.random.default_rng(1))
    assert np.array_equal(stage.surrogate.coefficients, before)
    assert len(stage.__dict__.get("layers", [])) == 0
    assert first.m_T == second.m_T


def test_truncation_flag_when_iteration_cap_hits():
    ls, config = reference_case("case_1d")
    import dataclasses
    config = dataclasses.replace(config, max_iterations=1, eta_mode="literal")
    run = run_glhs(ls.fun, config, np.random.default_rng(2))
    assert run.terminated == "max-iterations"
    assert len(run.iterations) == 1


@pytest.mark.parametrize("case", ["case_1d", "case_2d"])
def test_local_pass_improves_on_the_global_fit(case):
    # mean absolute error over the first buffer zone must drop in >= 9
    # of 10 seeded repetitions
    ls, config = reference_case(case)
    root = np.random.SeedSequence(2 if case == "case_1d" else 116)
    gseed, _, *rseeds = root.spawn(12)
    stage = build_global_stage(ls.fun, config, np.random.default_rng(gseed))
    base = stage.surrogate(stage.grid)
    zone = np.abs(base) <= stage.eta0
    truth = ls.fun(stage.grid[zone])
    global_mae = np.mean(np.abs(truth - base[zone]))
    wins = 0
    for r in range(10):
        rep = run_repetition(ls.fun, stage, config,
                             np.random.default_rng(rseeds[r]))
        hybrid_mae = np.mean(np.abs(truth - rep.chain(stage.grid[zone])))
        wins += hybrid_mae < global_mae
    assert wins >= 9
