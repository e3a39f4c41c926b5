"""Synthetic observation streams: random walkers driven by a directional
grid over an occupancy map.

Draws come from a counter-based generator (SplitMix64) so each walker owns
an independent stream addressed by (seed, walker, draw index). That keeps
output identical for a given seed regardless of how walkers are batched
internally, and costs a few integer ops per draw instead of a generator
object per walker.
"""

from __future__ import annotations

import numpy as np

from .model import BinningSpec, DirectionalGrid, GeometryMismatchError
from .grids import OccupancyGrid
from .trajectories import ObservationSet

STREAM_VERSION = 1
MAX_RESAMPLES = 8
FREE_THRESHOLD = 0.5

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U01 = 2.0 ** -53


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _draw_u01(states: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """The counters'th uniform [0,1) variate of each stream."""
    z = _mix64(states + counters * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * _U01


def _neighbor_table(spec: BinningSpec) -> np.ndarray:
    """(k, 2) array of (dcol, drow) moves, one per direction bin."""
    centers = spec.bin_centers()
    return np.stack([np.rint(np.cos(centers)).astype(np.int64),
                     np.rint(np.sin(centers)).astype(np.int64)], axis=1)


def sample_walks(model: DirectionalGrid, occupancy: OccupancyGrid,
                 n_walkers: int, steps_per_walker: int, seed: int,
                 spec: BinningSpec | None = None) -> ObservationSet:
    """Simulate walkers sampling directions from the model per cell.

    Walkers start at uniformly chosen free cells. Every sampled direction
    is emitted as an observation at the current cell center before the move
    is attempted, so recorded frequencies match the model at every cell
    even where walls censor movement. A draw leading off the map or into
    an occupied cell is resampled, up to 8 times per step, after which the
    walker terminates. Observations are ordered by (walker, draw).
    """
    if spec is None:
        spec = BinningSpec(k=model.k)
    if model.geometry != occupancy.geometry:
        raise GeometryMismatchError("model and occupancy geometry differ")
    if n_walkers < 1 or steps_per_walker < 1:
        raise ValueError("n_walkers and steps_per_walker must be positive")
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")

    free = np.argwhere(occupancy.values < FREE_THRESHOLD)
    if len(free) == 0:
        raise ValueError("occupancy map has no free cells")
    free_rows = free[:, 0]
    free_cols = free[:, 1]
    occupied = occupancy.values >= FREE_THRESHOLD

    k = model.k
    cum = np.cumsum(model.probs, axis=2)
    moves = _neighbor_table(spec)
    centers = np.array([spec.bin_center(i) for i in range(1, k + 1)])
    geo = model.geometry

    states = np.uint64(seed) ^ np.arange(n_walkers, dtype=np.uint64)
    counters = np.zeros(n_walkers, dtype=np.uint64)

    u = _draw_u01(states, counters + np.uint64(1))
    counters += np.uint64(1)
    start = np.minimum((u * len(free)).astype(np.int64), len(free) - 1)
    rows = free_rows[start].copy()
    cols = free_cols[start].copy()

    walker_ids = np.arange(n_walkers, dtype=np.int64)
    emit_count = np.zeros(n_walkers, dtype=np.int64)
    out_walker: list[np.ndarray] = []
    out_seq: list[np.ndarray] = []
    out_row: list[np.ndarray] = []
    out_col: list[np.ndarray] = []
    out_bin: list[np.ndarray] = []

    active = np.ones(n_walkers, dtype=bool)
    for _ in range(steps_per_walker):
        if not active.any():
            break
        pending = np.flatnonzero(active)
        for attempt in range(MAX_RESAMPLES + 1):
            if len(pending) == 0:
                break
            u = _draw_u01(states[pending], counters[pending] + np.uint64(1))
            counters[pending] += np.uint64(1)
            cell_cum = cum[rows[pending], cols[pending]]
            bins = np.minimum((u[:, np.newaxis] >= cell_cum).sum(axis=1),
                              k - 1)

            out_walker.append(walker_ids[pending])
            out_seq.append(emit_count[pending].copy())
            out_row.append(rows[pending].copy())
            out_col.append(cols[pending].copy())
            out_bin.append(bins)
            emit_count[pending] += 1

            dest_c = cols[pending] + moves[bins, 0]
            dest_r = rows[pending] + moves[bins, 1]
            inside = ((dest_c >= 0) & (dest_c < geo.width)
                      & (dest_r >= 0) & (dest_r < geo.height))
            blocked = ~inside
            ok = inside.copy()
            ok[inside] = ~occupied[dest_r[inside], dest_c[inside]]
            blocked = ~ok

            moved = pending[ok]
            rows[moved] = dest_r[ok]
            cols[moved] = dest_c[ok]
            pending = pending[blocked]
        if len(pending):
            active[pending] = False

    walker = np.concatenate(out_walker)
    seq = np.concatenate(out_seq)
    row = np.concatenate(out_row)
    col = np.concatenate(out_col)
    bins = np.concatenate(out_bin)
    order = np.lexsort((seq, walker))

    return ObservationSet(
        person_id=walker[order],
        t=seq[order].astype(np.float64),
        x=geo.origin_x + (col[order] + 0.5) * geo.resolution,
        y=geo.origin_y + (row[order] + 0.5) * geo.resolution,
        delta=centers[bins[order]],
        source=f"synth:seed={seed}",
    )
