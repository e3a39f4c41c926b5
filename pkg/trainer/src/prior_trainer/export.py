"""Dense prior export: slide the network over every cell of a map and
write the predictions as a BFF1 grid the core toolkit can load.

Window extraction mirrors the toolkit's semantics exactly (bilinear on
the cell-center lattice, 0.5 padding beyond the map) so that a prior
trained on one component's windows scores correctly on the other's.
"""

from __future__ import annotations

import os
import struct

import numpy as np
import torch

from .maps import OccupancyMap
from .network import WINDOW_SIZE, PriorNet

BFF1_MAGIC = b"BFF1"
_GRID_HEADER = struct.Struct("<4sIIIddd")  # magic, w, h, k, res, ox, oy

UNKNOWN_OCCUPANCY = 0.5
PROB_FLOOR = 1e-4


def model_cells(occupancy: OccupancyMap, resolution: float):
    """Covering model grid: (width, height) cells at the given resolution."""
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    width_m = occupancy.width * occupancy.resolution
    height_m = occupancy.height * occupancy.resolution
    width = max(1, int(np.ceil(width_m / resolution - 1e-9)))
    height = max(1, int(np.ceil(height_m / resolution - 1e-9)))
    return width, height


def extract_window(occupancy: OccupancyMap, center_x: float, center_y: float,
                   window_resolution: float) -> np.ndarray:
    """64x64 bilinear occupancy patch around a world point."""
    if not window_resolution > 0:
        raise ValueError("window_resolution must be positive")
    offsets = (np.arange(WINDOW_SIZE, dtype=np.float64)
               - (WINDOW_SIZE - 1) / 2.0) * window_resolution
    xs = center_x + offsets[np.newaxis, :]
    ys = center_y + offsets[:, np.newaxis]
    xs, ys = np.broadcast_arrays(xs, ys)

    gx = (xs - occupancy.origin_x) / occupancy.resolution - 0.5
    gy = (ys - occupancy.origin_y) / occupancy.resolution - 0.5
    c0 = np.floor(gx).astype(np.int64)
    r0 = np.floor(gy).astype(np.int64)
    tx = gx - c0
    ty = gy - r0

    def corner(rows, cols):
        inside = ((rows >= 0) & (rows < occupancy.height)
                  & (cols >= 0) & (cols < occupancy.width))
        out = np.full(rows.shape, UNKNOWN_OCCUPANCY, dtype=np.float64)
        out[inside] = occupancy.values[rows[inside], cols[inside]]
        return out

    v00 = corner(r0, c0)
    v01 = corner(r0, c0 + 1)
    v10 = corner(r0 + 1, c0)
    v11 = corner(r0 + 1, c0 + 1)
    top = v00 * (1.0 - tx) + v01 * tx
    bottom = v10 * (1.0 - tx) + v11 * tx
    return np.clip(top * (1.0 - ty) + bottom * ty, 0.0, 1.0)


def _encode_annotations(annotations: dict[str, str] | None) -> bytes:
    if not annotations:
        return b""
    lines = []
    for key, value in annotations.items():
        key = str(key)
        value = str(value)
        if ":" in key or "\n" in key or "\n" in value:
            raise ValueError(
                f"annotation {key!r} cannot contain ':' or newlines"
            )
        lines.append(f"{key}: {value}\n")
    return "".join(lines).encode("utf-8")


def write_bff1(path: str | os.PathLike, width: int, height: int,
               resolution: float, origin_x: float, origin_y: float,
               probs: np.ndarray,
               annotations: dict[str, str] | None = None) -> None:
    probs = np.ascontiguousarray(probs, dtype=np.float32)
    if probs.shape[:2] != (height, width):
        raise ValueError(
            f"probs shape {probs.shape} does not match ({height}, {width}, k)"
        )
    k = probs.shape[2]
    with open(path, "wb") as fh:
        fh.write(_GRID_HEADER.pack(BFF1_MAGIC, width, height, k,
                                   resolution, origin_x, origin_y))
        fh.write(probs.tobytes())
        fh.write(_encode_annotations(annotations))


def predict_grid(model: PriorNet, occupancy: OccupancyMap,
                 window_resolution: float,
                 batch_size: int = 256) -> np.ndarray:
    """Per-cell network outputs clamped and renormalized onto the simplex."""
    width, height = model_cells(occupancy, window_resolution)
    windows = np.empty((width * height, WINDOW_SIZE, WINDOW_SIZE),
                       dtype=np.float32)
    i = 0
    for row in range(height):
        cy = occupancy.origin_y + (row + 0.5) * window_resolution
        for col in range(width):
            cx = occupancy.origin_x + (col + 0.5) * window_resolution
            windows[i] = extract_window(occupancy, cx, cy, window_resolution)
            i += 1

    model.eval()
    outputs = np.empty((width * height, model.k), dtype=np.float64)
    with torch.no_grad():
        for start in range(0, len(windows), batch_size):
            batch = torch.from_numpy(windows[start:start + batch_size])
            outputs[start:start + batch_size] = model(batch).double().numpy()

    # a linear head can emit anything; the floor keeps every heading alive
    outputs = np.maximum(outputs, PROB_FLOOR)
    outputs /= outputs.sum(axis=1, keepdims=True)
    return outputs.reshape(height, width, model.k)


def export_prior(model: PriorNet, occupancy: OccupancyMap,
                 window_resolution: float, out_path: str | os.PathLike,
                 annotations: dict[str, str] | None = None) -> tuple[int, int]:
    """Write the dense prior for the map; returns the (width, height) grid."""
    probs = predict_grid(model, occupancy, window_resolution)
    merged = {"provenance": "prior", "generator": "prior-trainer"}
    if annotations:
        merged.update(annotations)
    write_bff1(out_path, probs.shape[1], probs.shape[0], window_resolution,
               occupancy.origin_x, occupancy.origin_y, probs,
               annotations=merged)
    return probs.shape[1], probs.shape[0]
