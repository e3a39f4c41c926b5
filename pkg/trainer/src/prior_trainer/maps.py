"""Occupancy map loading, independent of the grid toolkit.

Maps are a grayscale image plus a YAML sidecar naming resolution (meters
per cell), world origin of the lower-left corner, and the negate flag
(0: white is free, dark is occupied; 1: pixel value is occupancy
directly). Values are stored row 0 = minimum y.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import yaml
from PIL import Image


class MapError(Exception):
    """Unreadable or inconsistent occupancy map input."""


@dataclass(frozen=True, eq=False)
class OccupancyMap:
    width: int
    height: int
    resolution: float
    origin_x: float
    origin_y: float
    values: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, OccupancyMap):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and self.resolution == other.resolution
                and self.origin_x == other.origin_x
                and self.origin_y == other.origin_y
                and np.array_equal(self.values, other.values))

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("map dimensions must be positive")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.height, self.width):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"(height, width) = ({self.height}, {self.width})"
            )
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


def _load_sidecar(path: str) -> dict:
    try:
        with open(path) as fh:
            meta = yaml.safe_load(fh)
    except OSError as exc:
        raise MapError(f"cannot read map metadata {path}: {exc}") from exc
    if not isinstance(meta, dict):
        raise MapError(f"{path}: metadata must be a mapping")
    if "resolution" not in meta or "origin" not in meta:
        raise MapError(f"{path}: metadata needs resolution and origin")
    if not float(meta["resolution"]) > 0:
        raise MapError(f"{path}: resolution must be positive")
    origin = meta["origin"]
    if not isinstance(origin, (list, tuple)) or len(origin) < 2:
        raise MapError(f"{path}: origin must list at least [x, y]")
    if int(meta.get("negate", 0)) not in (0, 1):
        raise MapError(f"{path}: negate must be 0 or 1")
    return meta


def load_map(path: str | os.PathLike) -> OccupancyMap:
    """Load a YAML sidecar (with its image) or an image (with its sidecar)."""
    path = os.fspath(path)
    if path.endswith((".yaml", ".yml")):
        meta_path = path
        meta = _load_sidecar(meta_path)
        if "image" not in meta:
            raise MapError(f"{meta_path}: metadata does not name an image")
        image_path = os.path.join(os.path.dirname(meta_path), meta["image"])
    else:
        image_path = path
        meta_path = os.path.splitext(path)[0] + ".yaml"
        meta = _load_sidecar(meta_path)

    try:
        image = Image.open(image_path)
        image.load()
    except OSError as exc:
        raise MapError(f"cannot read map image {image_path}: {exc}") from exc
    if image.mode != "L":
        raise MapError(
            f"{image_path}: expected a grayscale image, got mode {image.mode}"
        )
    pixels = np.asarray(image, dtype=np.float64)
    if int(meta.get("negate", 0)):
        values = pixels / 255.0
    else:
        values = (255.0 - pixels) / 255.0
    # image row 0 is max y; storage wants row 0 = min y
    values = np.flipud(values)
    origin = meta["origin"]
    return OccupancyMap(
        width=values.shape[1],
        height=values.shape[0],
        resolution=float(meta["resolution"]),
        origin_x=float(origin[0]),
        origin_y=float(origin[1]),
        values=values,
    )
