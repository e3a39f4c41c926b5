import math

import numpy as np
import pytest
from PIL import Image

from pedflow.grids import (
    CellIndex,
    Geometry,
    MapFormatError,
    OccupancyGrid,
    OutOfBoundsError,
    extract_window,
    load_metadata,
    load_occupancy,
    load_occupancy_map,
    write_occupancy,
)


def bilinear_reference(values, resolution, origin_x, origin_y, x, y, pad=0.5):
    """Scalar bilinear interpolation on cell centers, written independently
    of the library; out-of-grid corners contribute the padding value."""
    gx = (x - origin_x) / resolution - 0.5
    gy = (y - origin_y) / resolution - 0.5
    c0 = math.floor(gx)
    r0 = math.floor(gy)
    tx = gx - c0
    ty = gy - r0

    def at(r, c):
        if 0 <= r < values.shape[0] and 0 <= c < values.shape[1]:
            return values[r, c]
        return pad

    top = (1 - tx) * at(r0, c0) + tx * at(r0, c0 + 1)
    bottom = (1 - tx) * at(r0 + 1, c0) + tx * at(r0 + 1, c0 + 1)
    return (1 - ty) * top + ty * bottom


def make_grid(values, resolution=1.0, origin=(0.0, 0.0)):
    values = np.asarray(values, dtype=np.float64)
    h, w = values.shape
    return OccupancyGrid(w, h, resolution, origin[0], origin[1], values)


def test_world_to_cell_basic():
    geo = Geometry(4, 3, 1.0, 0.0, 0.0)
    assert geo.world_to_cell(0.5, 0.5) == CellIndex(0, 0)


def test_world_to_cell_fractional_resolution():
    geo = Geometry(4, 3, 0.4, 0.0, 0.0)
    assert geo.world_to_cell(1.0, 0.0) == CellIndex(2, 0)


def test_world_to_cell_out_of_bounds():
    geo = Geometry(4, 3, 1.0, 0.0, 0.0)
    with pytest.raises(OutOfBoundsError):
        geo.world_to_cell(-0.1, 0.0)
    try:
        geo.world_to_cell(10.0, 2.0)
    except OutOfBoundsError as exc:
        assert exc.x == 10.0 and exc.y == 2.0


def test_cell_center_world_to_cell_inverse():
    rng = np.random.default_rng(11)
    for _ in range(50):
        geo = Geometry(
            int(rng.integers(1, 30)), int(rng.integers(1, 30)),
            float(rng.uniform(0.05, 2.0)),
            float(rng.uniform(-40, 40)), float(rng.uniform(-40, 40)),
        )
        col = int(rng.integers(0, geo.width))
        row = int(rng.integers(0, geo.height))
        x, y = geo.cell_center(CellIndex(col, row))
        assert geo.world_to_cell(x, y) == CellIndex(col, row)


def test_world_to_cells_matches_scalar():
    geo = Geometry(7, 5, 0.4, -1.0, 2.0)
    rng = np.random.default_rng(3)
    xs = rng.uniform(-2.5, 3.0, size=200)
    ys = rng.uniform(1.0, 5.5, size=200)
    rows, cols, inside = geo.world_to_cells(xs, ys)
    for i in range(len(xs)):
        try:
            cell = geo.world_to_cell(float(xs[i]), float(ys[i]))
            assert inside[i]
            assert (cols[i], rows[i]) == (cell.col, cell.row)
        except OutOfBoundsError:
            assert not inside[i]


def test_covering_geometry_exact_and_padded():
    base = Geometry(10, 6, 0.5, 1.0, -2.0)  # 5.0 m x 3.0 m
    exact = Geometry.covering(base, 1.0)
    assert (exact.width, exact.height) == (5, 3)
    assert (exact.origin_x, exact.origin_y) == (1.0, -2.0)
    padded = Geometry.covering(base, 0.4)  # 5.0/0.4 = 12.5 -> 13
    assert (padded.width, padded.height) == (13, 8)
    same = Geometry.covering(base, 0.5)
    assert same == base


def test_load_occupancy_all_white_is_free(tmp_path):
    path = tmp_path / "white.png"
    Image.fromarray(np.full((4, 5), 255, dtype=np.uint8), mode="L").save(path)
    from pedflow.grids import MapMetadata
    grid = load_occupancy(path, MapMetadata(resolution=0.1))
    assert grid.values.shape == (4, 5)
    assert np.all(grid.values == 0.0)


def test_load_occupancy_all_black_is_occupied(tmp_path):
    path = tmp_path / "black.png"
    Image.fromarray(np.zeros((4, 5), dtype=np.uint8), mode="L").save(path)
    from pedflow.grids import MapMetadata
    grid = load_occupancy(path, MapMetadata(resolution=0.1))
    assert np.all(grid.values == 1.0)


def test_load_occupancy_pixel_order_and_negate(tmp_path):
    from pedflow.grids import MapMetadata
    path = tmp_path / "two.png"
    Image.fromarray(np.array([[255, 0]], dtype=np.uint8), mode="L").save(path)
    grid = load_occupancy(path, MapMetadata(resolution=1.0))
    assert grid.values[0, 0] == 0.0 and grid.values[0, 1] == 1.0
    negated = load_occupancy(path, MapMetadata(resolution=1.0, negate=1))
    assert negated.values[0, 0] == 1.0 and negated.values[0, 1] == 0.0


def test_load_occupancy_row_zero_is_min_y(tmp_path):
    # image top row (max y) dark, bottom row white
    from pedflow.grids import MapMetadata
    pixels = np.array([[0, 0], [255, 255]], dtype=np.uint8)
    path = tmp_path / "rows.png"
    Image.fromarray(pixels, mode="L").save(path)
    grid = load_occupancy(path, MapMetadata(resolution=1.0))
    assert np.all(grid.values[0] == 0.0)  # min-y row came from image bottom
    assert np.all(grid.values[1] == 1.0)


def test_load_occupancy_rejects_rgb(tmp_path):
    path = tmp_path / "color.png"
    Image.fromarray(np.zeros((2, 2, 3), dtype=np.uint8), mode="RGB").save(path)
    from pedflow.grids import MapMetadata
    with pytest.raises(MapFormatError):
        load_occupancy(path, MapMetadata(resolution=1.0))


def test_metadata_validation(tmp_path):
    good = tmp_path / "m.yaml"
    good.write_text("image: a.pgm\nresolution: 0.05\norigin: [-1.0, 2.0, 0.0]\nnegate: 0\n")
    meta = load_metadata(good)
    assert meta.resolution == 0.05
    assert (meta.origin_x, meta.origin_y) == (-1.0, 2.0)
    bad_res = tmp_path / "bad1.yaml"
    bad_res.write_text("resolution: -0.1\n")
    with pytest.raises(MapFormatError):
        load_metadata(bad_res)
    bad_origin = tmp_path / "bad2.yaml"
    bad_origin.write_text("resolution: 0.1\norigin: 3\n")
    with pytest.raises(MapFormatError):
        load_metadata(bad_origin)
    missing = tmp_path / "bad3.yaml"
    missing.write_text("origin: [0, 0]\n")
    with pytest.raises(MapFormatError):
        load_metadata(missing)


@pytest.mark.parametrize("name", ["round.pgm", "round.png"])
def test_write_load_round_trip(tmp_path, name):
    rng = np.random.default_rng(7)
    values = rng.integers(0, 256, size=(6, 9)).astype(np.float64) / 255.0
    grid = make_grid(values, resolution=0.25, origin=(-3.0, 1.5))
    path = tmp_path / name
    write_occupancy(grid, path)
    loaded = load_occupancy_map(path)
    assert loaded.geometry == grid.geometry
    # 8-bit multiples survive the quantization exactly
    assert np.allclose(loaded.values, grid.values, atol=0.5 / 255.0)
    write_occupancy(loaded, tmp_path / ("again_" + name))
    again = load_occupancy_map(tmp_path / ("again_" + name))
    assert np.array_equal(again.values, loaded.values)


def test_write_load_round_trip_within_one_step(tmp_path):
    rng = np.random.default_rng(8)
    grid = make_grid(rng.uniform(0, 1, size=(5, 4)))
    write_occupancy(grid, tmp_path / "q.pgm")
    loaded = load_occupancy_map(tmp_path / "q.pgm")
    assert np.max(np.abs(loaded.values - grid.values)) <= 1.0 / 255.0


def test_load_via_yaml_path(tmp_path):
    grid = make_grid(np.zeros((3, 3)), resolution=0.5, origin=(2.0, 4.0))
    write_occupancy(grid, tmp_path / "env.pgm")
    via_yaml = load_occupancy_map(tmp_path / "env.yaml")
    via_image = load_occupancy_map(tmp_path / "env.pgm")
    assert via_yaml == via_image


def test_load_image_without_sidecar_fails(tmp_path):
    Image.fromarray(np.zeros((2, 2), dtype=np.uint8), mode="L").save(tmp_path / "alone.png")
    with pytest.raises(MapFormatError):
        load_occupancy_map(tmp_path / "alone.png")


def test_pgm_header_bytes(tmp_path):
    grid = make_grid(np.zeros((2, 3)))
    write_occupancy(grid, tmp_path / "h.pgm")
    data = (tmp_path / "h.pgm").read_bytes()
    assert data.startswith(b"P5\n3 2\n255\n")
    assert len(data) == len(b"P5\n3 2\n255\n") + 6


def test_extract_window_constant_grid():
    grid = make_grid(np.ones((40, 40)), resolution=0.1)
    win = extract_window(grid, CellIndex(20, 20), 0.05)
    assert win.values.shape == (64, 64)
    assert np.all(win.values == 1.0)


def test_extract_window_corner_padding():
    grid = make_grid(np.zeros((10, 10)), resolution=1.0)
    win = extract_window(grid, CellIndex(0, 0), 1.0)
    # far corner of the window lies well outside the map: pure padding
    assert win.values[0, 0] == 0.5
    assert win.values[63, 0] == 0.5
    # samples near the window center sit inside the free map
    assert win.values[32, 32] == 0.0


def test_extract_window_matches_reference_bilinear():
    rng = np.random.default_rng(19)
    values = rng.uniform(0, 1, size=(8, 8))
    grid = make_grid(values, resolution=0.05, origin=(0.3, -0.2))
    center = CellIndex(4, 3)
    cx, cy = grid.cell_center(center)
    win = extract_window(grid, center, 0.4)
    for u, v in [(31, 31), (32, 32), (30, 33), (31, 30)]:
        x = cx + (u - 31.5) * 0.4
        y = cy + (v - 31.5) * 0.4
        expected = bilinear_reference(values, 0.05, 0.3, -0.2, x, y)
        assert win.values[v, u] == pytest.approx(expected, abs=1e-12)


def test_extract_window_world_point_equals_cell_index():
    rng = np.random.default_rng(23)
    grid = make_grid(rng.uniform(0, 1, size=(12, 12)), resolution=0.2)
    cell = CellIndex(5, 7)
    by_cell = extract_window(grid, cell, 0.1)
    by_world = extract_window(grid, grid.cell_center(cell), 0.1)
    assert np.array_equal(by_cell.values, by_world.values)
    assert by_cell.center_world == by_world.center_world


def test_extract_window_values_in_unit_interval():
    rng = np.random.default_rng(29)
    grid = make_grid(rng.uniform(0, 1, size=(6, 6)), resolution=0.3)
    for _ in range(10):
        x = float(rng.uniform(-2, 4))
        y = float(rng.uniform(-2, 4))
        win = extract_window(grid, (x, y), float(rng.uniform(0.05, 1.0)))
        assert win.values.min() >= 0.0 and win.values.max() <= 1.0


def test_occupancy_grid_validation():
    with pytest.raises(ValueError):
        make_grid(np.full((2, 2), 1.5))
    with pytest.raises(ValueError):
        OccupancyGrid(3, 2, 1.0, 0.0, 0.0, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        OccupancyGrid(2, 2, 0.0, 0.0, 0.0, np.zeros((2, 2)))


def test_occupancy_values_immutable():
    grid = make_grid(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        grid.values[0, 0] = 1.0
