"""Global-local hybrid surrogate pipeline.

Builds a cheap global expansion of the limit state, then iteratively
refines it with local expansions fitted on Christoffel samples inside a
shrinking buffer zone around the estimated limit-state surface. The
result is a piecewise surrogate cheap enough to sweep with millions of
Monte Carlo points.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .basis import PceSurrogate, as_points, basis_matrix, index_count, index_set
from .domain_learning import domain_learning_step
from .errors import EmptyZoneError, InsufficientBudgetError
from .regression import (
    cross_validate_order,
    least_squares_fit,
    orthonormalize_on_grid,
    weighted_least_squares_fit,
)

log = logging.getLogger(__name__)

ETA_MODES = ("literal", "rms", "mse")
WEIGHT_MODES = ("reciprocal", "literal")
INDEX_RULES = ("hyperbolic", "total")


@dataclass
class GlhsConfig:
    """User parameters of the pipeline.

    m_l = None applies the sampling-rate rule: four samples per basis
    function of the maximum local order, at least N + 1.
    """

    d: int
    m_K: int = 10_000
    m_c: int = 10_000_000
    c: float = 1.0
    alpha: float = 0.8
    m_0: int = 5
    n: int = 2
    n_max: int = 3
    m_l: int | None = None
    c_r: float = 1.5
    m_d: int = 10_000
    eps: float = 0.01
    max_iterations: int = 10
    cv_folds: int = 5
    weight_mode: str = "reciprocal"
    eta_mode: str = "literal"
    index_rule: str = "hyperbolic"
    seed: int | None = None

    def resolved_m_l(self):
        n_basis = index_count(self.d, self.n_max, rule=self.index_rule)
        if self.m_l is not None:
            return self.m_l
        return max(4 * n_basis, n_basis + 1)

    def validate(self):
        """Returns (errors, warnings) as lists of messages, both possibly empty."""
        errors = []
        warnings = []
        if self.d < 1:
            errors.append(f"d must be >= 1, got {self.d}")
        for name in ("m_K", "m_c", "m_0", "m_d", "max_iterations"):
            value = getattr(self, name)
            if value < 1:
                errors.append(f"{name} must be >= 1, got {value}")
        if self.n < 0:
            errors.append(f"n must be >= 0, got {self.n}")
        if self.n_max < 1:
            errors.append(f"n_max must be >= 1, got {self.n_max}")
        if not 0 < self.alpha <= 1:
            errors.append(f"\N{GREEK SMALL LETTER ALPHA} must lie in (0, 1], "
                          f"got {self.alpha}")
        if self.c <= 0:
            errors.append(f"c must be positive, got {self.c}")
        elif self.c < 1:
            warnings.append(
                f"c = {self.c} narrows the buffer below the observed "
                "surrogate error; c >= 1 is recommended"
            )
        if self.c_r <= 1:
            errors.append(f"c_r must exceed 1, got {self.c_r}")
        if self.eps < 0:
            errors.append(f"eps must be >= 0, got {self.eps}")
        if self.cv_folds < 2:
            errors.append(f"cv_folds must be >= 2, got {self.cv_folds}")
        if self.weight_mode not in WEIGHT_MODES:
            errors.append(
                f"weight_mode must be one of {WEIGHT_MODES}, got {self.weight_mode!r}"
            )
        if self.eta_mode not in ETA_MODES:
            errors.append(
                f"eta_mode must be one of {ETA_MODES}, got {self.eta_mode!r}"
            )
        if self.index_rule not in INDEX_RULES:
            errors.append(
                f"index_rule must be one of {INDEX_RULES}, got {self.index_rule!r}"
            )
        if not errors and self.d >= 1:
            n_global = index_count(self.d, self.n, rule=self.index_rule)
            if self.m_0 < n_global:
                errors.append(
                    f"m_0 = {self.m_0} cannot fit the {n_global}-term global "
                    f"basis of order {self.n}"
                )
            n_local = index_count(self.d, self.n_max, rule=self.index_rule)
            if self.m_l is not None and self.m_l < n_local:
                errors.append(
                    f"m_l = {self.m_l} is below the basis dimension "
                    f"N(n_max) = {n_local}; omit m_l to apply the "
                    "sampling-rate rule"
                )
        return errors, warnings


class CountingFunction:
    """Wraps an expensive model and tallies how many points it was asked for."""

    def __init__(self, fun):
        self.fun = fun
        self.count = 0

    def __call__(self, points):
        points = np.asarray(points)
        self.count += points.shape[0] if points.ndim > 1 else 1
        return self.fun(points)


class HybridSurrogate:
    """Global expansion plus an ordered chain of (threshold, local) layers.

    Evaluation: v = global(x); then for each layer in order, wherever
    |v| <= threshold the local expansion overrides v. Points the chain
    classifies as far from the surface are untouched by later layers.
    """

    def __init__(self, global_surrogate, layers=None):
        self.global_surrogate = global_surrogate
        self.layers = list(layers) if layers else []
        self.d = global_surrogate.d

    def evaluate(self, points):
        pts = as_points(points, self.d)
        v = self.global_surrogate(pts)
        for eta, local in self.layers:
            mask = np.abs(v) <= eta
            if np.any(mask):
                v[mask] = local(pts[mask])
        return v

    __call__ = evaluate


@dataclass
class GlobalStage:
    """Everything fixed before the local iterations start."""

    grid: np.ndarray
    x0: np.ndarray
    y0: np.ndarray
    surrogate: PceSurrogate
    eta0: float


@dataclass
class IterationDiagnostics:
    l: int
    eta_prev: float
    zone_size: int
    order: int
    eta_residual: float
    eta_next: float
    m_T: int
    cv_scores: dict = field(default_factory=dict)
    cv_skipped: dict = field(default_factory=dict)
    # training data for the appended local fit (arrays; not serialized)
    points: object = None
    values: object = None
    weights: object = None


@dataclass
class RepetitionResult:
    chain: HybridSurrogate
    m_T: int
    iterations: list
    terminated: str


def fit_global_surrogate(g, config, rng):
    """Draw m_0 uniform training points, evaluate g, fit by plain least squares."""
    indices = index_set(config.d, config.n, rule=config.index_rule)
    n_basis = indices.shape[0]
    if config.m_0 < n_basis:
        raise InsufficientBudgetError(
            f"global fit needs at least {n_basis} evaluations for order "
            f"{config.n}, got m_0 = {config.m_0}"
        )
    x0 = rng.uniform(-1, 1, (config.m_0, config.d))
    y0 = g(x0)
    psi = basis_matrix(indices, x0)
    coef, residual = least_squares_fit(psi, y0)
    log.debug("global fit residual norm %.3e", residual)
    return PceSurrogate(indices, coef), x0, y0


def compute_eta0(x0, y0, surrogate, c, alpha):
    """Initial buffer width: c times the worst surrogate error over the
    training points whose response magnitude is within alpha of the largest.

    When the alpha filter empties the set, the full training set is used.
    """
    residuals = np.abs(y0 - surrogate(x0))
    near = np.abs(y0) <= alpha * np.max(np.abs(y0))
    if not np.any(near):
        near = np.ones_like(near, dtype=bool)
    return float(c * np.max(residuals[near]))


def build_global_stage(g, config, rng):
    """Draw the domain grid, fit the global surrogate, set the buffer width.

    These artifacts are fixed per experiment; repetitions share them and
    randomize only the local stages.
    """
    grid = rng.uniform(-1, 1, (config.m_K, config.d))
    surrogate, x0, y0 = fit_global_surrogate(g, config, rng)
    eta0 = compute_eta0(x0, y0, surrogate, config.c, config.alpha)
    log.info("global stage ready: eta0 = %.6g", eta0)
    return GlobalStage(grid=grid, x0=x0, y0=y0, surrogate=surrogate, eta0=eta0)


def _eta_update(residuals, mode):
    squared = residuals ** 2
    if mode == "literal":
        return float(np.sqrt(np.sum(squared)))
    if mode == "rms":
        return float(np.sqrt(np.mean(squared)))
    if mode == "mse":
        return float(np.mean(squared))
    raise ValueError(f"unknown eta_mode {mode!r}")


def glhs_iteration(g, chain, eta_prev, grid, config, rng, l,
                   grid_values=None):
    """One refinement pass: learn the zone, fit a local expansion, append it.

    Raises EmptyZoneError when stage (a) finds no grid points, which is
    the organic termination of the loop.
    """
    step = domain_learning_step(
        grid, chain, eta_prev,
        n_max=config.n_max, m_d=config.m_d, m_l=config.resolved_m_l(),
        c_r=config.c_r, eps=config.eps, rng=rng,
        grid_values=grid_values, index_rule=config.index_rule,
        weight_mode=config.weight_mode,
    )
    y = g(step.points)
    cv = cross_validate_order(
        step.points, y, step.weights, config.n_max, step.dense, rng,
        k_folds=config.cv_folds, index_rule=config.index_rule,
    )
    indices = index_set(config.d, cv.order, rule=config.index_rule)
    orth = orthonormalize_on_grid(indices, step.dense)
    local = weighted_least_squares_fit(step.points, y, step.weights, orth)
    chain.layers.append((eta_prev, local))
    residuals = y - chain(step.points)
    eta_next = _eta_update(residuals, config.eta_mode)
    diag = IterationDiagnostics(
        l=l, eta_prev=float(eta_prev), zone_size=step.zone.size,
        order=cv.order, eta_residual=eta_next, eta_next=eta_next,
        m_T=0, cv_scores=cv.scores, cv_skipped=cv.skipped,
        points=step.points, values=y, weights=step.weights,
    )
    return diag


def run_repetition(g, stage, config, rng, eta1_inflate=False):
    """Run the local-iteration loop against a prebuilt global stage.

    eta1_inflate widens the second zone to the average of the first two
    thresholds, forcing a second pass when the residual threshold alone
    would terminate; used by the method-comparison experiment.
    """
    counting = CountingFunction(g)
    chain = HybridSurrogate(stage.surrogate)
    eta = stage.eta0
    iterations = []
    terminated = "max-iterations"
    grid_values = chain(stage.grid)
    for l in range(1, config.max_iterations + 1):
        try:
            diag = glhs_iteration(
                counting, chain, eta, stage.grid, config, rng, l,
                grid_values=grid_values,
            )
        except EmptyZoneError:
            log.info("iteration %d: empty buffer zone, terminating", l)
            terminated = "empty-zone"
            break
        if eta1_inflate and l == 1:
            diag.eta_next = (stage.eta0 + diag.eta_residual) / 2
            log.info(
                "iteration 1: inflating the next threshold from %.3g to %.3g",
                diag.eta_residual, diag.eta_next,
            )
        diag.m_T = config.m_0 + counting.count
        iterations.append(diag)
        eta = diag.eta_next
        grid_values = chain(stage.grid)
    else:
        log.info(
            "iteration cap %d reached with a non-empty zone; continuing "
            "would need a larger grid or a wider threshold",
            config.max_iterations,
        )
    return RepetitionResult(
        chain=chain,
        m_T=config.m_0 + counting.count,
        iterations=iterations,
        terminated=terminated,
    )


@dataclass
class GlhsRun:
    stage: GlobalStage
    chain: HybridSurrogate
    m_T: int
    iterations: list
    terminated: str


def run_glhs(g, config, rng, eta1_inflate=False):
    """Full single-stream pipeline: global stage plus the local loop.

    The experiment protocol (shared global stage across repetitions)
    lives in the cli module; this entry point consumes one rng for
    everything and reports m_T straight from the call counter.
    """
    counting = CountingFunction(g)
    stage = build_global_stage(counting, config, rng)
    rep = run_repetition(counting, stage, config, rng,
                         eta1_inflate=eta1_inflate)
    return GlhsRun(
        stage=stage,
        chain=rep.chain,
        m_T=counting.count,
        iterations=rep.iterations,
        terminated=rep.terminated,
    )
