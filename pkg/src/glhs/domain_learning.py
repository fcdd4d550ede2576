"""Buffer-zone identification and densification (domain learning).

Stage (a): keep the grid points where the current surrogate chain is
within the threshold of zero. Stage (b): bound them by an axis-aligned
hyperrectangle with padding, clipped to the box. Stage (c): densify the
zone by rejection resampling inside the rectangle. Stage (d): build the
Christoffel measure on the dense zone and draw the regression samples.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .basis import BOX_LOWER, BOX_UPPER, as_points, index_set
from .christoffel import build_christoffel_measure, draw_samples
from .errors import (
    EmptyZoneError,
    IllPosedFitError,
    NeedsMoreSamplesError,
    VanishingBufferError,
)
from .regression import orthonormalize_on_grid

log = logging.getLogger(__name__)

# consecutive all-rejected batches tolerated before giving up
REJECTION_PATIENCE = 50


@dataclass
class BufferZone:
    points: np.ndarray
    indices: np.ndarray
    threshold: float

    @property
    def size(self):
        return self.points.shape[0]


def compute_buffer_zone(grid, chain, eta, values=None):
    """Grid points with |chain(x)| <= eta, in grid order.

    values, when given, must be chain evaluated on the grid (callers
    cache it); an empty result is the loop termination signal.
    """
    grid = as_points(grid)
    if values is None:
        values = chain(grid)
    mask = np.abs(values) <= eta
    return BufferZone(
        points=grid[mask],
        indices=np.flatnonzero(mask),
        threshold=float(eta),
    )


def bounding_hyperrectangle(zone_points, eps):
    """Componentwise min/max over the zone, padded by eps, clipped to the box.

    For d = 1 this degenerates to a plain interval.
    """
    zone_points = as_points(zone_points)
    if zone_points.shape[0] == 0:
        raise EmptyZoneError("cannot bound an empty buffer zone")
    lower = np.maximum(zone_points.min(axis=0) - eps, BOX_LOWER)
    upper = np.minimum(zone_points.max(axis=0) + eps, BOX_UPPER)
    return lower, upper


def resample_buffer(rect, chain, eta, m_d, c_r, rng, seed_points):
    """Densify the zone to exactly m_d points by rejection sampling.

    Draws batches of ceil(c_r * m_d) uniform points in rect and keeps
    those within the buffer. Seed points (the stage-(a) evidence) come
    first in the merged result; accepted samples follow in draw order.
    """
    lower, upper = rect
    d = lower.shape[0]
    seed_points = as_points(seed_points, d)
    batches = [seed_points]
    total = seed_points.shape[0]
    m_r = int(np.ceil(c_r * m_d))
    dry_spell = 0
    while total < m_d:
        batch = rng.uniform(lower, upper, (m_r, d))
        keep = batch[np.abs(chain(batch)) <= eta]
        if keep.shape[0] == 0:
            dry_spell += 1
            if dry_spell >= REJECTION_PATIENCE:
                raise VanishingBufferError(
                    f"no acceptance in {REJECTION_PATIENCE} consecutive batches "
                    f"of {m_r}; consider a larger threshold or padding"
                )
        else:
            dry_spell = 0
        batches.append(keep)
        total += keep.shape[0]
    return np.vstack(batches)[:m_d]


@dataclass
class DomainStep:
    zone: BufferZone
    rect: tuple
    dense: np.ndarray
    orth: object
    measure: object
    sample_indices: np.ndarray
    points: np.ndarray
    weights: np.ndarray


def domain_learning_step(grid, chain, eta, n_max, m_d, m_l, c_r, eps, rng,
                         grid_values=None, index_rule="hyperbolic",
                         weight_mode="reciprocal"):
    """Stages (a)-(d) in order; returns everything the local fit needs.

    Raises EmptyZoneError when stage (a) finds nothing (the termination
    signal). On a rank-deficient dense zone the target is doubled once;
    a second failure is fatal.
    """
    grid = as_points(grid)
    zone = compute_buffer_zone(grid, chain, eta, values=grid_values)
    if zone.size == 0:
        raise EmptyZoneError(f"no grid points with |surrogate| <= {eta}")
    rect = bounding_hyperrectangle(zone.points, eps)
    dense = resample_buffer(rect, chain, eta, m_d, c_r, rng, zone.points)
    indices = index_set(grid.shape[1], n_max, rule=index_rule)
    try:
        orth = orthonormalize_on_grid(indices, dense)
    except NeedsMoreSamplesError as first:
        log.info("dense zone rank deficient (%s); doubling to %d points",
                 first, 2 * m_d)
        dense = resample_buffer(rect, chain, eta, 2 * m_d, c_r, rng, dense)
        try:
            orth = orthonormalize_on_grid(indices, dense)
        except NeedsMoreSamplesError as second:
            raise IllPosedFitError(
                f"dense zone still rank deficient after doubling to "
                f"{2 * m_d} points: {second}",
                rank=second.rank,
                required=second.required,
            ) from second
    measure = build_christoffel_measure(orth, weight_mode=weight_mode)
    sel = draw_samples(measure, m_l, rng)
    return DomainStep(
        zone=zone,
        rect=rect,
        dense=dense,
        orth=orth,
        measure=measure,
        sample_indices=sel,
        points=dense[sel],
        weights=measure.weights[sel],
    )
