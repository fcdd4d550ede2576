"""Failure-probability estimators.

Plain Monte Carlo (also used to sweep surrogates), the buffered
non-iterative estimator with an optional high-fidelity budget, the
group-wise iterative estimator that reclassifies samples nearest the
surrogate's zero set, and the nearest-rank quantile utility for
data-defined failure thresholds.

Failure is g <= 0 (closed) throughout.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import StarvationError

MC_CHUNK = 65_536
DEFAULT_DRAW_CAP = 100_000_000


@dataclass
class FailureReport:
    """Aggregated outcome of one method over its repetitions."""

    method: str
    pf: float
    m_c: int | None = None
    m_T: int | None = None
    mu: float | None = None
    sigma: float | None = None
    runs: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_runs(cls, method, run_values, m_c=None, m_T=None, **extra):
        values = np.asarray(run_values, dtype=np.float64)
        mu = float(values.mean())
        sigma = float(values.std(ddof=1)) if values.shape[0] > 1 else 0.0
        return cls(method=method, pf=mu, m_c=m_c, m_T=m_T, mu=mu, sigma=sigma,
                   runs=list(map(float, values)), extra=extra)


def mc_chunk_seeds(mc_seed_seq, m_c, chunk=MC_CHUNK):
    """One child seed per chunk so evaluation order never matters.

    Children are constructed statelessly (SeedSequence.spawn advances a
    counter on the parent, so repeated spawning would silently change
    the evaluation set between methods sharing one stream).
    """
    n_chunks = -(-m_c // chunk)
    return [
        np.random.SeedSequence(entropy=mc_seed_seq.entropy,
                               spawn_key=mc_seed_seq.spawn_key + (i,))
        for i in range(n_chunks)
    ]


def mc_points(mc_seed_seq, m_c, d, chunk=MC_CHUNK):
    """Yield the shared Monte Carlo evaluation set in fixed chunks."""
    seeds = mc_chunk_seeds(mc_seed_seq, m_c, chunk)
    produced = 0
    for child in seeds:
        size = min(chunk, m_c - produced)
        yield np.random.default_rng(child).uniform(-1, 1, (size, d))
        produced += size


def mc_failure_probability(g, d, m_c, mc_seed_seq, chunk=MC_CHUNK):
    """Fraction of m_c uniform points with g <= 0.

    Serves the reference estimate (g = true model), the surrogate-only
    estimate, and the hybrid estimate alike; identical seed sequences
    yield the identical evaluation set.
    """
    failures = 0
    for block in mc_points(mc_seed_seq, m_c, d, chunk):
        failures += int(np.sum(g(block) <= 0))
    return failures / m_c


def materialize_mc_points(mc_seed_seq, m_c, d, chunk=MC_CHUNK):
    """The same evaluation set as mc_points, as one array."""
    return np.vstack(list(mc_points(mc_seed_seq, m_c, d, chunk)))


def failure_fraction(g, points, chunk=MC_CHUNK):
    """Fraction of the given points with g <= 0, evaluated in chunks."""
    failures = 0
    for start in range(0, points.shape[0], chunk):
        failures += int(np.sum(g(points[start:start + chunk]) <= 0))
    return failures / points.shape[0]


def non_iterative_pf(g_s, g_t, eta, d, rng, m=None, budget=None,
                     batch=MC_CHUNK, draw_cap=DEFAULT_DRAW_CAP):
    """Buffered estimator: classify by the surrogate sign outside the
    buffer |g_s| <= eta and by the true model inside it.

    Without a budget, rng must be a SeedSequence and m points are drawn;
    the true model is evaluated only on the in-buffer points. With a
    budget, rng must be a Generator and sampling continues until exactly
    `budget` points have landed in the buffer; the estimate is the
    failure count over every point drawn up to and including the one
    that filled the budget. Returns (pf, m_T).
    """
    if budget is None:
        if m is None:
            raise ValueError("either m or budget is required")
        failures = 0
        m_t = 0
        for block in mc_points(rng, m, d, batch):
            gs = g_s(block)
            in_buffer = np.abs(gs) <= eta
            failures += int(np.sum(gs < -eta))
            if np.any(in_buffer):
                failures += int(np.sum(g_t(block[in_buffer]) <= 0))
            m_t += int(np.sum(in_buffer))
        return failures / m, m_t

    n_total = 0
    deep_failures = 0
    buffered = []
    while True:
        if n_total >= draw_cap:
            raise StarvationError(
                f"drew {n_total} samples without collecting {budget} "
                f"buffer points (have {len(buffered)})"
            )
        block = rng.uniform(-1, 1, (batch, d))
        gs = g_s(block)
        in_buffer = np.flatnonzero(np.abs(gs) <= eta)
        need = budget - len(buffered)
        if in_buffer.shape[0] >= need:
            # stop at the draw that fills the budget
            last = in_buffer[need - 1]
            n_total += last + 1
            deep_failures += int(np.sum(gs[:last + 1] < -eta))
            buffered.extend(block[in_buffer[:need]])
            break
        n_total += block.shape[0]
        deep_failures += int(np.sum(gs < -eta))
        buffered.extend(block[in_buffer])
    buffer_points = np.array(buffered)
    buffer_failures = int(np.sum(g_t(buffer_points) <= 0))
    return (deep_failures + buffer_failures) / n_total, budget


def iterative_li_pf(g_s, g_t, samples, group_size, tolerance=None,
                    max_groups=None):
    """Group-wise reclassification estimator.

    Samples are sorted by |g_s| ascending; groups of group_size are
    re-evaluated with the true model, nearest the surrogate's zero set
    first, until the estimate moves less than the tolerance over a full
    group (default 10/m) or every sample has been reclassified.
    Returns (pf, m_T, groups_used).
    """
    samples = np.asarray(samples, dtype=np.float64)
    m = samples.shape[0]
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    if tolerance is None:
        tolerance = 10.0 / m
    gs = g_s(samples)
    classified = gs <= 0
    failures = int(np.sum(classified))
    pf = failures / m
    order = np.argsort(np.abs(gs), kind="stable")
    n_groups = -(-m // group_size)
    if max_groups is not None:
        n_groups = min(n_groups, max_groups)
    used = 0
    for k in range(n_groups):
        group = order[k * group_size:(k + 1) * group_size]
        truth = g_t(samples[group]) <= 0
        failures += int(np.sum(truth)) - int(np.sum(classified[group]))
        classified[group] = truth
        used += 1
        pf_new = failures / m
        if abs(pf_new - pf) < tolerance:
            pf = pf_new
            break
        pf = pf_new
    return pf, used * group_size if used * group_size <= m else m, used


def empirical_quantile_threshold(values, c_lim):
    """Nearest-rank quantile: the ascending order statistic at ceil(c_lim n)."""
    if not 0 < c_lim < 1:
        raise ValueError(f"c_lim must lie in (0, 1), got {c_lim}")
    values = np.sort(np.asarray(values, dtype=np.float64))
    if values.shape[0] == 0:
        raise ValueError("values must be non-empty")
    rank = math.ceil(c_lim * values.shape[0])
    return float(values[rank - 1])


def threshold_limit_state(model, threshold):
    """Limit state g(x) = threshold - model(x): responses above the
    threshold are failures. Pairs with empirical_quantile_threshold to
    mark the top (1 - c_lim) fraction of a response as the failure set."""

    def g(points):
        return threshold - model(points)

    return g
