"""Model evaluation: average assigned probability, data-efficiency curves,
and the gold-standard upper bound."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .grids import Geometry, OutOfBoundsError
from .model import (
    BinningSpec,
    CountGrid,
    DirectionalGrid,
    FusionParams,
    accumulate_set,
    bin_direction,
    bin_directions,
    build_bff,
    floor_field,
    uniform_grid,
)
from .trajectories import Observation, ObservationSet

DEFAULT_CHUNK = 2000


class EvaluationError(Exception):
    """No observation in the set could be scored."""


def point_likelihood(model: DirectionalGrid, obs: Observation,
                     spec: BinningSpec | None = None) -> float | None:
    """Probability the model assigns to one observation.

    Returns None when the observation falls outside the grid or carries no
    heading; callers decide whether skipping is acceptable.
    """
    if spec is None:
        spec = BinningSpec(k=model.k)
    if obs.delta is None or math.isnan(obs.delta):
        return None
    try:
        cell = model.geometry.world_to_cell(obs.x, obs.y)
    except OutOfBoundsError:
        return None
    b = bin_direction(obs.delta, spec)
    return float(model.probs[cell.row, cell.col, b - 1])


@dataclass(frozen=True)
class DatasetLikelihood:
    """Average assigned probability plus the skip tally behind it."""

    value: float
    scored: int
    skipped: int


def dataset_likelihood(model: DirectionalGrid, observations: ObservationSet,
                       spec: BinningSpec | None = None) -> DatasetLikelihood:
    """Mean model probability over all scorable observations.

    Out-of-bounds points are skipped and counted, never scored. Raises
    EvaluationError when nothing remains.
    """
    if spec is None:
        spec = BinningSpec(k=model.k)
    observations.require_deltas()
    rows, cols, inside = model.geometry.world_to_cells(observations.x,
                                                       observations.y)
    skipped = int(np.count_nonzero(~inside))
    scored = int(np.count_nonzero(inside))
    if scored == 0:
        raise EvaluationError(
            f"all {len(observations)} observations fall outside the grid"
        )
    bins = bin_directions(observations.delta[inside], spec)
    values = model.probs[rows[inside], cols[inside], bins - 1]
    return DatasetLikelihood(float(values.mean()), scored, skipped)


def upper_bound(observations: ObservationSet, geometry: Geometry,
                k: int = 8,
                spec: BinningSpec | None = None) -> DatasetLikelihood:
    """Score the set under the frequency model built from the set itself.

    This is the ceiling any prior-based model approaches as data grows.
    """
    if spec is None:
        spec = BinningSpec(k=k)
    counts = CountGrid.empty(geometry, spec.k)
    accumulate_set(counts, observations, spec)
    return dataset_likelihood(floor_field(counts), observations, spec)


@dataclass(frozen=True)
class CurveResult:
    """Likelihood-vs-data-volume curve with its evaluation metadata.

    points: (n, likelihood) pairs, n strictly increasing raw stream
    positions. alpha is None when the curve was built without a prior.
    """

    points: tuple[tuple[int, float], ...]
    prior_id: str
    alpha: float | None
    chunk_size: int
    dataset: str
    skipped: int
    upper_bound: float | None = None
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        last = -1
        for n, value in self.points:
            if n <= last:
                raise ValueError(f"curve positions not increasing at n={n}")
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"curve value {value} outside [0, 1]")
            last = n


def likelihood_curve(observations: ObservationSet,
                     prior: DirectionalGrid | None = None,
                     params: FusionParams | None = None,
                     chunk_size: int = DEFAULT_CHUNK,
                     geometry: Geometry | None = None,
                     k: int = 8,
                     spec: BinningSpec | None = None,
                     dataset: str = "",
                     with_upper_bound: bool = True) -> CurveResult:
    """Evaluate models built on growing prefixes against the full set.

    Prefixes are taken in file order at multiples of chunk_size (n=0 first,
    the final partial chunk included). Counts accumulate incrementally; the
    model at each n is rebuilt from those counts only. With a prior the
    model is the posterior blend, without one the raw frequency model with
    uniform fallback. The upper bound scores the full-set frequency model.
    """
    if chunk_size < 1:
        raise ValueError("chunk_size must be at least 1")
    if prior is not None:
        geometry = prior.geometry
        k = prior.k
        if params is None:
            params = FusionParams()
    elif geometry is None:
        raise ValueError("geometry is required when no prior is given")
    if spec is None:
        spec = BinningSpec(k=k)
    observations.require_deltas()

    rows, cols, inside = geometry.world_to_cells(observations.x,
                                                 observations.y)
    skipped = int(np.count_nonzero(~inside))
    scored = int(np.count_nonzero(inside))
    if scored == 0:
        raise EvaluationError(
            f"all {len(observations)} observations fall outside the grid"
        )
    bins = bin_directions(observations.delta[inside], spec)
    eval_rows = rows[inside]
    eval_cols = cols[inside]
    eval_bins = bins - 1

    def score(model: DirectionalGrid) -> float:
        return float(model.probs[eval_rows, eval_cols, eval_bins].mean())

    counts = CountGrid.empty(geometry, spec.k)
    if prior is not None:
        base = prior
        prior_id = prior.provenance
    else:
        base = uniform_grid(geometry, spec.k)
        prior_id = "none"
    points = [(0, score(base))]
    total = len(observations)
    position = 0
    while position < total:
        step = min(chunk_size, total - position)
        accumulate_set(counts, observations[position:position + step], spec)
        position += step
        if prior is not None:
            model = build_bff(counts, prior, params)
        else:
            model = floor_field(counts)
        points.append((position, score(model)))

    upper = score(floor_field(counts)) if with_upper_bound else None
    return CurveResult(
        points=tuple(points),
        prior_id=prior_id,
        alpha=None if prior is None else params.alpha,
        chunk_size=chunk_size,
        dataset=dataset,
        skipped=skipped,
        upper_bound=upper,
    )


def write_curve_csv(result: CurveResult, path: str | os.PathLike) -> None:
    """Write a curve as CSV with `# key: value` metadata comments."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# prior: {result.prior_id}\n")
        alpha = "none" if result.alpha is None else repr(result.alpha)
        fh.write(f"# alpha: {alpha}\n")
        fh.write(f"# chunk: {result.chunk_size}\n")
        fh.write(f"# dataset: {result.dataset}\n")
        fh.write(f"# skipped: {result.skipped}\n")
        if result.upper_bound is not None:
            fh.write(f"# upper_bound: {result.upper_bound!r}\n")
        writer = csv.writer(fh)
        writer.writerow(["n", "likelihood"])
        for n, value in result.points:
            writer.writerow([n, repr(value)])


def read_curve_csv(path: str | os.PathLike) -> CurveResult:
    """Read a curve CSV produced by write_curve_csv."""
    meta: dict[str, str] = {}
    points: list[tuple[int, float]] = []
    with open(path, newline="") as fh:
        rows = []
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                meta[key.strip()] = value.strip()
            else:
                rows.append(line)
        for record in csv.reader(rows):
            if not record or record[0] == "n":
                continue
            points.append((int(record[0]), float(record[1])))
    alpha_text = meta.get("alpha", "none")
    upper_text = meta.get("upper_bound")
    return CurveResult(
        points=tuple(points),
        prior_id=meta.get("prior", ""),
        alpha=None if alpha_text == "none" else float(alpha_text),
        chunk_size=int(meta.get("chunk", DEFAULT_CHUNK)),
        dataset=meta.get("dataset", ""),
        skipped=int(meta.get("skipped", 0)),
        upper_bound=None if upper_text is None else float(upper_text),
    )
