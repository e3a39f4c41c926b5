"""Occupancy grids, world/cell coordinate transforms, and window extraction.

World frame convention used everywhere in this package: row 0 is the row with
the smallest world y (y grows with the row index). Images, which store the top
row first, are flipped on load and on write.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import yaml
from PIL import Image

WINDOW_SIZE = 64
UNKNOWN_OCCUPANCY = 0.5


class MapFormatError(Exception):
    """Raised for unreadable or malformed map images / metadata sidecars."""


class OutOfBoundsError(Exception):
    """A world coordinate falls outside the grid. Callers decide skip-vs-fail."""

    def __init__(self, x: float, y: float):
        super().__init__(f"point ({x:.6g}, {y:.6g}) lies outside the grid")
        self.x = x
        self.y = y


class CellIndex(NamedTuple):
    col: int
    row: int


@dataclass(frozen=True)
class Geometry:
    """Shared grid descriptor: extent in cells plus the metric embedding."""

    width: int
    height: int
    resolution: float
    origin_x: float
    origin_y: float

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid must be at least 1x1")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")

    def cell_center(self, cell: CellIndex) -> tuple[float, float]:
        return (
            self.origin_x + (cell.col + 0.5) * self.resolution,
            self.origin_y + (cell.row + 0.5) * self.resolution,
        )

    def world_to_cell(self, x: float, y: float) -> CellIndex:
        col = int(np.floor((x - self.origin_x) / self.resolution))
        row = int(np.floor((y - self.origin_y) / self.resolution))
        if not (0 <= col < self.width and 0 <= row < self.height):
            raise OutOfBoundsError(x, y)
        return CellIndex(col, row)

    def world_to_cells(self, xs, ys):
        """Vectorized world->cell transform.

        Returns (rows, cols, inside) arrays; rows/cols are only meaningful
        where ``inside`` is True.
        """
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        cols = np.floor((xs - self.origin_x) / self.resolution).astype(np.int64)
        rows = np.floor((ys - self.origin_y) / self.resolution).astype(np.int64)
        inside = (cols >= 0) & (cols < self.width) & (rows >= 0) & (rows < self.height)
        return rows, cols, inside

    @classmethod
    def covering(cls, other: "Geometry | OccupancyGrid", resolution: float) -> "Geometry":
        """Geometry at ``resolution`` covering the metric extent of ``other``."""
        if not resolution > 0:
            raise ValueError("resolution must be positive")
        width_m = other.width * other.resolution
        height_m = other.height * other.resolution
        return cls(
            width=max(1, int(np.ceil(width_m / resolution - 1e-9))),
            height=max(1, int(np.ceil(height_m / resolution - 1e-9))),
            resolution=resolution,
            origin_x=other.origin_x,
            origin_y=other.origin_y,
        )


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Static occupancy probabilities on a metric grid.

    ``values`` has shape (height, width); entry [row, col] is the probability
    that the cell is occupied, in [0, 1]. Immutable after construction.
    """

    width: int
    height: int
    resolution: float
    origin_x: float
    origin_y: float
    values: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (self.geometry == other.geometry
                and np.array_equal(self.values, other.values))

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.height, self.width):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"(height={self.height}, width={self.width})"
            )
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise ValueError("occupancy values must lie in [0, 1]")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def geometry(self) -> Geometry:
        return Geometry(self.width, self.height, self.resolution,
                        self.origin_x, self.origin_y)

    def cell_center(self, cell: CellIndex) -> tuple[float, float]:
        return self.geometry.cell_center(cell)

    def world_to_cell(self, x: float, y: float) -> CellIndex:
        return self.geometry.world_to_cell(x, y)


@dataclass(frozen=True, eq=False)
class Window:
    """64x64 occupancy patch at its own resolution around a reference point.

    Sample u (column) of a row sits at horizontal offset (u - 31.5) * resolution
    from ``center_world``; rows likewise, row 0 at minimum y. The patch is
    symmetric about the reference point, so quarter-turn rotations and flips of
    the array correspond exactly to the same transform of the geometry.
    """

    resolution: float
    values: np.ndarray
    center_world: tuple[float, float]
    size: int = WINDOW_SIZE

    def __eq__(self, other):
        if not isinstance(other, Window):
            return NotImplemented
        return (self.resolution == other.resolution
                and self.center_world == other.center_world
                and self.size == other.size
                and np.array_equal(self.values, other.values))

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.size, self.size):
            raise ValueError(f"window values must be {self.size}x{self.size}")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValueError("window values must lie in [0, 1]")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class MapMetadata:
    """Sidecar fields for a map image, mirroring map-server conventions."""

    resolution: float
    origin_x: float = 0.0
    origin_y: float = 0.0
    negate: int = 0
    image: str | None = field(default=None, compare=False)


def load_metadata(path: str | os.PathLike) -> MapMetadata:
    """Read a yaml/key:value metadata sidecar (resolution, origin, negate)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise MapFormatError(f"cannot read map metadata {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise MapFormatError(f"malformed map metadata {path}: {exc}") from exc
    if not isinstance(raw, dict) or "resolution" not in raw:
        raise MapFormatError(f"map metadata {path} must define 'resolution'")
    origin = raw.get("origin", [0.0, 0.0])
    if not isinstance(origin, (list, tuple)) or len(origin) < 2:
        raise MapFormatError(f"map metadata {path}: 'origin' must be [x, y]")
    resolution = float(raw["resolution"])
    if not resolution > 0:
        raise MapFormatError(f"map metadata {path}: resolution must be positive")
    negate = int(raw.get("negate", 0))
    if negate not in (0, 1):
        raise MapFormatError(f"map metadata {path}: negate must be 0 or 1")
    return MapMetadata(
        resolution=resolution,
        origin_x=float(origin[0]),
        origin_y=float(origin[1]),
        negate=negate,
        image=raw.get("image"),
    )


def load_occupancy(image_path: str | os.PathLike,
                   metadata: MapMetadata) -> OccupancyGrid:
    """Load an 8-bit grayscale PGM/PNG image as an occupancy grid.

    Occupancy is (255 - pixel) / 255 for negate=0 and pixel / 255 for
    negate=1; image rows are flipped so row 0 holds the smallest world y.
    """
    try:
        img = Image.open(image_path)
        img.load()
    except OSError as exc:
        raise MapFormatError(f"cannot read map image {image_path}: {exc}") from exc
    if img.mode != "L":
        raise MapFormatError(
            f"map image {image_path} has mode {img.mode}; "
            "expected 8-bit grayscale (mode L)"
        )
    pixels = np.asarray(img, dtype=np.float64)
    if metadata.negate:
        occupancy = pixels / 255.0
    else:
        occupancy = (255.0 - pixels) / 255.0
    occupancy = np.flipud(occupancy)  # image top row = max y -> row 0 = min y
    height, width = occupancy.shape
    return OccupancyGrid(
        width=width,
        height=height,
        resolution=metadata.resolution,
        origin_x=metadata.origin_x,
        origin_y=metadata.origin_y,
        values=occupancy,
    )


def load_occupancy_map(path: str | os.PathLike) -> OccupancyGrid:
    """Load a map given either the yaml sidecar or the image path.

    For an image path the sidecar is looked up next to it with a .yaml
    extension; for a yaml path the image comes from its 'image' field
    (resolved relative to the sidecar).
    """
    path = os.fspath(path)
    if path.endswith((".yaml", ".yml")):
        meta = load_metadata(path)
        if not meta.image:
            raise MapFormatError(f"map metadata {path} does not name an 'image'")
        image_path = os.path.join(os.path.dirname(path), meta.image)
        return load_occupancy(image_path, meta)
    meta_path = os.path.splitext(path)[0] + ".yaml"
    if not os.path.exists(meta_path):
        raise MapFormatError(f"map image {path} has no metadata sidecar {meta_path}")
    return load_occupancy(path, load_metadata(meta_path))


def write_occupancy(grid: OccupancyGrid, image_path: str | os.PathLike,
                    metadata_path: str | os.PathLike | None = None,
                    negate: int = 0) -> None:
    """Write a grid as PGM (P5) or PNG plus its metadata sidecar.

    Quantizes to 8 bits, so load(write(load(img))) reproduces occupancy
    within 1/255.
    """
    pixels = np.flipud(grid.values)
    if negate:
        raw = np.rint(pixels * 255.0)
    else:
        raw = np.rint(255.0 - pixels * 255.0)
    raw = raw.astype(np.uint8)
    image_path = os.fspath(image_path)
    if image_path.endswith(".pgm"):
        header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
        with open(image_path, "wb") as fh:
            fh.write(header)
            fh.write(raw.tobytes())
    else:
        Image.fromarray(raw, mode="L").save(image_path)
    if metadata_path is None:
        metadata_path = os.path.splitext(image_path)[0] + ".yaml"
    with open(metadata_path, "w", encoding="utf-8") as fh:
        fh.write(f"image: {os.path.basename(image_path)}\n")
        fh.write(f"resolution: {grid.resolution!r}\n")
        fh.write(f"origin: [{grid.origin_x!r}, {grid.origin_y!r}]\n")
        fh.write(f"negate: {negate}\n")


def _bilinear_sample(grid: OccupancyGrid, xs: np.ndarray, ys: np.ndarray,
                     pad_value: float) -> np.ndarray:
    """Bilinear interpolation on the cell-center lattice; out-of-grid corners
    contribute ``pad_value``."""
    gx = (xs - grid.origin_x) / grid.resolution - 0.5
    gy = (ys - grid.origin_y) / grid.resolution - 0.5
    c0 = np.floor(gx).astype(np.int64)
    r0 = np.floor(gy).astype(np.int64)
    tx = gx - c0
    ty = gy - r0

    def corner(rows, cols):
        inside = (rows >= 0) & (rows < grid.height) & (cols >= 0) & (cols < grid.width)
        out = np.full(rows.shape, pad_value, dtype=np.float64)
        out[inside] = grid.values[rows[inside], cols[inside]]
        return out

    v00 = corner(r0, c0)
    v01 = corner(r0, c0 + 1)
    v10 = corner(r0 + 1, c0)
    v11 = corner(r0 + 1, c0 + 1)
    top = v00 * (1.0 - tx) + v01 * tx
    bottom = v10 * (1.0 - tx) + v11 * tx
    return top * (1.0 - ty) + bottom * ty


def extract_window(grid: OccupancyGrid,
                   center: CellIndex | tuple[float, float],
                   window_resolution: float,
                   pad_value: float = UNKNOWN_OCCUPANCY) -> Window:
    """Extract a 64x64 occupancy patch at ``window_resolution`` around a point.

    ``center`` is either a cell of ``grid`` (the patch centers on that cell's
    center) or a world (x, y) point, e.g. the center of a coarser model cell.
    Each sample is bilinearly interpolated from the source grid; samples whose
    interpolation support leaves the grid blend toward ``pad_value``.
    """
    if not window_resolution > 0:
        raise ValueError("window_resolution must be positive")
    if isinstance(center, CellIndex):
        cx, cy = grid.cell_center(center)
    else:
        cx, cy = float(center[0]), float(center[1])
    offsets = (np.arange(WINDOW_SIZE, dtype=np.float64)
               - (WINDOW_SIZE - 1) / 2.0) * window_resolution
    xs = cx + offsets[np.newaxis, :]
    ys = cy + offsets[:, np.newaxis]
    xs, ys = np.broadcast_arrays(xs, ys)
    values = _bilinear_sample(grid, xs, ys, pad_value)
    # interpolation of in-range values cannot escape [0, 1]; clip guards
    # against float fuzz only
    values = np.clip(values, 0.0, 1.0)
    return Window(resolution=window_resolution, values=values,
                  center_world=(cx, cy))
