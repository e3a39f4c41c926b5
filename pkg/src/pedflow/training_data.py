"""Export (occupancy window, direction distribution) training pairs."""

from __future__ import annotations

import os

import numpy as np

from . import formats
from .grids import CellIndex, OccupancyGrid, extract_window
from .model import CountGrid

DEFAULT_MIN_COUNT = 10


def export_pairs(counts: CountGrid, occupancy: OccupancyGrid,
                 path: str | os.PathLike, window_resolution: float,
                 min_count: int = DEFAULT_MIN_COUNT,
                 annotations: dict[str, str] | None = None) -> int:
    """Write one (window, target) pair per sufficiently observed cell.

    Cells with fewer than min_count observations produce unreliable
    frequency targets and are dropped. Windows are sampled from the
    occupancy map around each model cell's center, in world coordinates, so
    the model grid and the map may use different resolutions. Pairs come
    out in row-major cell order. Returns the number of pairs written.
    """
    if min_count < 1:
        raise ValueError("min_count must be at least 1")
    totals = counts.totals()
    keep = np.argwhere(totals >= min_count)
    n = len(keep)
    windows = np.empty((n, 64, 64), dtype=np.float64)
    targets = np.empty((n, counts.k), dtype=np.float64)
    for i, (row, col) in enumerate(keep):
        center = counts.geometry.cell_center(CellIndex(int(col), int(row)))
        windows[i] = extract_window(occupancy, center, window_resolution).values
        targets[i] = counts.counts[row, col] / totals[row, col]
    merged = {"min_count": str(min_count)}
    if annotations:
        merged.update(annotations)
    formats.write_bfft(path, windows, targets, window_resolution,
                       annotations=merged)
    return n
