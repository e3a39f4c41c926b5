"""Per-cell categorical transition models over k discrete headings.

Counts are exact integers and probabilities are derived from them lazily, so
incremental updates never drift. Unvisited cells get the uniform vector, the
unique noninformative choice that keeps the likelihood metric defined
everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .grids import Geometry, OutOfBoundsError

if TYPE_CHECKING:
    from .trajectories import Observation, ObservationSet

TWO_PI = 2.0 * math.pi

SIMPLEX_TOL = 1e-6

PROVENANCES = ("floor_field", "bayesian", "prior", "uniform")


class GeometryMismatchError(Exception):
    """Grids that should share a geometry do not."""


def wrap_angle(delta):
    """Wrap an angle (scalar or array) into [0, 2*pi)."""
    wrapped = np.mod(delta, TWO_PI)
    # mod can round up to exactly 2*pi for tiny negative inputs
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


@dataclass(frozen=True)
class BinningSpec:
    """k directions equally dividing [0, 2*pi), rotated by ``offset``.

    The default offset -pi/k centers bin i on angle (i-1) * 2*pi/k, i.e. for
    k=8 on the eight grid-neighbor directions. offset=0 gives bins whose
    lower edges sit on those angles instead.
    """

    k: int = 8
    offset: float | None = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.offset is None:
            object.__setattr__(self, "offset", -math.pi / self.k)
        if not -TWO_PI < self.offset < TWO_PI:
            raise ValueError("offset must lie in (-2*pi, 2*pi)")

    def bin_center(self, i: int) -> float:
        """Center angle of bin i (1-based), wrapped to [0, 2*pi)."""
        if not 1 <= i <= self.k:
            raise ValueError(f"bin index {i} outside [1, {self.k}]")
        return float(wrap_angle(self.offset + (2 * i - 1) * math.pi / self.k))

    def bin_centers(self) -> np.ndarray:
        return np.asarray([self.bin_center(i) for i in range(1, self.k + 1)])


def bin_directions(deltas, spec: BinningSpec) -> np.ndarray:
    """Vectorized direction binning; returns 1-based bin indices."""
    deltas = np.asarray(deltas, dtype=np.float64)
    if not np.all(np.isfinite(deltas)):
        raise ValueError("direction angles must be finite")
    wrapped = wrap_angle(deltas - spec.offset)
    idx = np.floor(wrapped * (spec.k / TWO_PI)).astype(np.int64)
    # wrapped == 2*pi - eps can round the product up to exactly k
    idx = np.clip(idx, 0, spec.k - 1)
    return idx + 1


def bin_direction(delta: float, spec: BinningSpec) -> int:
    """Bin index i in [1, k] with 2(i-1)pi/k <= wrap(delta - offset) < 2i pi/k."""
    return int(bin_directions(np.float64(delta), spec))


@dataclass(eq=False)
class CountGrid:
    """Per-cell direction counts plus a tally of skipped observations.

    ``counts`` has shape (height, width, k), dtype int64. Accumulation is
    single-writer; shard streams into private CountGrids and ``merge`` them
    for parallel ingestion.
    """

    geometry: Geometry
    counts: np.ndarray
    skipped: int = 0

    def __eq__(self, other):
        if not isinstance(other, CountGrid):
            return NotImplemented
        return (self.geometry == other.geometry
                and self.skipped == other.skipped
                and np.array_equal(self.counts, other.counts))

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        expected = (self.geometry.height, self.geometry.width)
        if self.counts.ndim != 3 or self.counts.shape[:2] != expected:
            raise ValueError(
                f"counts shape {self.counts.shape} does not match geometry "
                f"(height, width, k) = ({expected[0]}, {expected[1]}, k)"
            )
        if self.counts.size and self.counts.min() < 0:
            raise ValueError("counts must be nonnegative")

    @classmethod
    def empty(cls, geometry: Geometry, k: int = 8) -> "CountGrid":
        return cls(geometry, np.zeros((geometry.height, geometry.width, k),
                                      dtype=np.int64))

    @property
    def k(self) -> int:
        return self.counts.shape[2]

    def totals(self) -> np.ndarray:
        """Per-cell observation totals N, shape (height, width)."""
        return self.counts.sum(axis=2)

    def copy(self) -> "CountGrid":
        return CountGrid(self.geometry, self.counts.copy(), self.skipped)


@dataclass(frozen=True, eq=False)
class DirectionalGrid:
    """The map of dynamics: per-cell probabilities over k headings.

    Every cell lies on the probability simplex (sum 1 within 1e-6, entries in
    [0, 1]); construction enforces it. Immutable after build.

    Equality compares geometry, probabilities, and provenance;
    ``repaired_cells`` is load bookkeeping and excluded.
    """

    geometry: Geometry
    probs: np.ndarray
    provenance: str = "floor_field"
    repaired_cells: int = field(default=0, compare=False)

    def __eq__(self, other):
        if not isinstance(other, DirectionalGrid):
            return NotImplemented
        return (self.geometry == other.geometry
                and self.provenance == other.provenance
                and np.array_equal(self.probs, other.probs))

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        expected = (self.geometry.height, self.geometry.width)
        if probs.ndim != 3 or probs.shape[:2] != expected:
            raise ValueError(
                f"probs shape {probs.shape} does not match geometry "
                f"(height, width, k) = ({expected[0]}, {expected[1]}, k)"
            )
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if probs.size:
            if probs.min() < 0.0 or probs.max() > 1.0:
                raise ValueError("direction probabilities must lie in [0, 1]")
            sums = probs.sum(axis=2)
            worst = float(np.abs(sums - 1.0).max())
            if worst > SIMPLEX_TOL:
                raise ValueError(
                    f"cell distributions must sum to 1 within {SIMPLEX_TOL:g} "
                    f"(worst deviation {worst:.3g})"
                )
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def k(self) -> int:
        return self.probs.shape[2]


@dataclass(frozen=True)
class FusionParams:
    """Concentration alpha weighs the prior against observed counts.

    alpha = 0 is admitted as the exact floor-field limit (with the uniform
    fallback at never-visited cells).
    """

    alpha: float = 5.0

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("alpha must be nonnegative")


def accumulate(counts: CountGrid, obs: "Observation",
               spec: BinningSpec | None = None) -> CountGrid:
    """Count one observation into its cell's direction bin, in place.

    Out-of-bounds observations leave the counts unchanged and bump the
    ``skipped`` tally. Returns the same CountGrid for chaining.
    """
    if spec is None:
        spec = BinningSpec(k=counts.k)
    if counts.k != spec.k:
        raise ValueError(f"count grid has k={counts.k}, spec has k={spec.k}")
    try:
        cell = counts.geometry.world_to_cell(obs.x, obs.y)
    except OutOfBoundsError:
        counts.skipped += 1
        return counts
    b = bin_direction(obs.delta, spec)
    counts.counts[cell.row, cell.col, b - 1] += 1
    return counts


def accumulate_set(counts: CountGrid, observations: "ObservationSet",
                   spec: BinningSpec | None = None) -> CountGrid:
    """Vectorized accumulate over a whole observation set, in place.

    Equivalent to accumulating each observation in order (counting is
    order-free).
    """
    if spec is None:
        spec = BinningSpec(k=counts.k)
    if counts.k != spec.k:
        raise ValueError(f"count grid has k={counts.k}, spec has k={spec.k}")
    if len(observations) == 0:
        return counts
    geom = counts.geometry
    rows, cols, inside = geom.world_to_cells(observations.x, observations.y)
    bins = bin_directions(observations.delta[inside], spec)
    flat = (rows[inside] * geom.width + cols[inside]) * counts.k + (bins - 1)
    hist = np.bincount(flat, minlength=geom.height * geom.width * counts.k)
    counts.counts += hist.reshape(counts.counts.shape)
    counts.skipped += int(np.count_nonzero(~inside))
    return counts


def merge(a: CountGrid, b: CountGrid) -> CountGrid:
    """Elementwise sum of two count grids (associative and commutative)."""
    if a.geometry != b.geometry or a.k != b.k:
        raise GeometryMismatchError(
            "cannot merge count grids with different geometry or k"
        )
    return CountGrid(a.geometry, a.counts + b.counts, a.skipped + b.skipped)


def floor_field(counts: CountGrid) -> DirectionalGrid:
    """Frequentist transition model: per-cell normalized counts.

    Cells that were never observed get the uniform vector.
    """
    totals = counts.totals().astype(np.float64)
    visited = totals > 0
    probs = np.full(counts.counts.shape, 1.0 / counts.k, dtype=np.float64)
    probs[visited] = counts.counts[visited] / totals[visited, np.newaxis]
    return DirectionalGrid(counts.geometry, probs, provenance="floor_field")


def posterior_mean(q_cell, prior_cell, alpha: float) -> np.ndarray:
    """Posterior-mean direction probabilities for one cell.

    Returns (q_i + alpha * prior_i) / (N + alpha) where N = sum(q). With
    alpha = 0 this reduces to the empirical frequencies; alpha = 0 with N = 0
    is undefined and raises (callers fall back to the uniform vector).
    """
    q = np.asarray(q_cell, dtype=np.float64)
    prior = np.asarray(prior_cell, dtype=np.float64)
    if q.shape != prior.shape:
        raise ValueError("counts and prior must have the same length")
    if not alpha >= 0:
        raise ValueError("alpha must be nonnegative")
    if np.any(prior < 0) or abs(float(prior.sum()) - 1.0) > SIMPLEX_TOL:
        raise ValueError("prior cell must lie on the probability simplex")
    n = float(q.sum())
    if alpha == 0 and n == 0:
        raise ValueError(
            "posterior undefined for alpha=0 with no observations; "
            "use the uniform vector instead"
        )
    return (q + alpha * prior) / (n + alpha)


def build_bff(counts: CountGrid, prior: DirectionalGrid,
              params: FusionParams) -> DirectionalGrid:
    """Fuse observed counts with a prior grid via the posterior mean, per cell.

    Unobserved cells take the prior verbatim (the formula's N = 0 limit,
    kept exact rather than computed as (alpha*p)/alpha). With alpha = 0 they
    take the uniform vector instead, matching the floor-field convention.
    """
    if counts.geometry != prior.geometry or counts.k != prior.k:
        raise GeometryMismatchError(
            "count grid and prior must share geometry and k"
        )
    alpha = params.alpha
    totals = counts.totals().astype(np.float64)
    visited = totals > 0
    if alpha > 0:
        probs = prior.probs.copy()
    else:
        probs = np.full(counts.counts.shape, 1.0 / counts.k, dtype=np.float64)
    denom = totals + alpha
    numer = counts.counts.astype(np.float64) + alpha * prior.probs
    probs[visited] = numer[visited] / denom[visited, np.newaxis]
    return DirectionalGrid(counts.geometry, probs, provenance="bayesian")


def uniform_grid(geometry: Geometry, k: int = 8,
                 provenance: str = "uniform") -> DirectionalGrid:
    """Grid with the uniform direction vector in every cell."""
    probs = np.full((geometry.height, geometry.width, k), 1.0 / k,
                    dtype=np.float64)
    return DirectionalGrid(geometry, probs, provenance=provenance)
