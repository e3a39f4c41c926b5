"""Prior transition grids: uniform, and file-backed (network-generated)
priors with validation and bounded repair."""

from __future__ import annotations

import os

import numpy as np

from . import formats
from .grids import Geometry
from .model import PROVENANCES, SIMPLEX_TOL, DirectionalGrid, uniform_grid

# Cells whose sum is off by more than the simplex tolerance but within this
# bound are renormalized; anything worse is a trainer bug, not float fuzz.
REPAIR_TOL = 1e-2


class GridValidationError(Exception):
    """A loaded grid fails simplex validation beyond the repair tolerance."""


def uniform_prior(geometry: Geometry, k: int = 8) -> DirectionalGrid:
    """The uninformed prior: every cell gets (1/k, ..., 1/k)."""
    return uniform_grid(geometry, k, provenance="uniform")


def write_prior(grid: DirectionalGrid, path: str | os.PathLike) -> None:
    """Write any DirectionalGrid as BFF1 (f32 payload, provenance annotated)."""
    formats.write_bff1(path, grid.geometry, grid.probs,
                       annotations={"provenance": grid.provenance})


def load_prior(path: str | os.PathLike) -> DirectionalGrid:
    """Load and validate a BFF1 grid.

    Cell sums within 1e-6 of 1 pass untouched (f32 quantization fuzz), sums
    within the repair tolerance are renormalized, anything worse or any
    negative entry raises. The number of renormalized cells is reported on
    the returned grid as ``repaired_cells``.
    """
    geometry, raw, annotations = formats.read_bff1(path)
    probs = raw.astype(np.float64)
    if probs.min() < 0.0:
        raise GridValidationError(
            f"{path}: negative direction probability {probs.min():.6g}"
        )
    sums = probs.sum(axis=2)
    deviation = np.abs(sums - 1.0)
    if float(deviation.max()) > REPAIR_TOL:
        raise GridValidationError(
            f"{path}: cell sum deviates from 1 by {deviation.max():.3g}, "
            f"beyond repair tolerance {REPAIR_TOL:g}"
        )
    needs_repair = (deviation > SIMPLEX_TOL) | (probs.max(axis=2) > 1.0)
    repaired = int(np.count_nonzero(needs_repair))
    if repaired:
        probs = probs.copy()
        probs[needs_repair] /= sums[needs_repair, np.newaxis]
    provenance = annotations.get("provenance", "prior")
    if provenance not in PROVENANCES:
        provenance = "prior"
    return DirectionalGrid(geometry, probs, provenance=provenance,
                           repaired_cells=repaired)
