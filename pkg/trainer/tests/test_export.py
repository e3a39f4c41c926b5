"""Grid export: window sampling, prediction layout, prior file output."""

import struct

import numpy as np
import pytest
import torch

from prior_trainer import (
    PROB_FLOOR,
    TrainConfig,
    build_model,
    export_prior,
    extract_window,
    load_map,
    model_cells,
    predict_grid,
    write_bff1,
)


def random_map(tmp_path, write_pgm, rng, shape, resolution, origin):
    occ = rng.integers(0, 256, size=shape) / 255.0
    image_path, _ = write_pgm(tmp_path, occ, resolution, origin)
    return load_map(image_path)


def test_model_cells_covering(tmp_path, write_pgm):
    rng = np.random.default_rng(0)
    occ = random_map(tmp_path, write_pgm, rng, (6, 8), 0.5, (1.0, 2.0))
    # same resolution keeps the source dims
    assert model_cells(occ, 0.5) == (8, 6)
    # 4.0m x 3.0m extent at 1.0m cells
    assert model_cells(occ, 1.0) == (4, 3)
    # coarser than the extent still yields at least one cell
    assert model_cells(occ, 10.0) == (1, 1)
    # exact multiples do not round up: 4.0 / 0.8 = 5
    assert model_cells(occ, 0.8) == (5, 4)
    with pytest.raises(ValueError):
        model_cells(occ, 0.0)


def test_window_matches_core_sampler(tmp_path, write_pgm):
    pedflow = pytest.importorskip("pedflow")
    rng = np.random.default_rng(3)
    occ = rng.integers(0, 256, size=(12, 10)) / 255.0
    image_path, _ = write_pgm(tmp_path, occ, 0.5, (3.0, -2.0))
    ours = load_map(image_path)
    theirs = pedflow.load_occupancy_map(image_path)
    assert np.array_equal(ours.values, theirs.values)
    for wres in (0.3, 1.0):
        for _ in range(10):
            # include centers outside the map so padding paths are compared
            cx = rng.uniform(1.0, 10.0)
            cy = rng.uniform(-4.0, 6.0)
            mine = extract_window(ours, cx, cy, wres)
            ref = pedflow.extract_window(theirs, (cx, cy), wres)
            assert mine.shape == (64, 64)
            assert mine.dtype == np.float64
            assert np.abs(mine - ref.values).max() <= 1e-6


def test_predict_grid_layout_and_simplex(tmp_path, write_pgm):
    rng = np.random.default_rng(4)
    occ = random_map(tmp_path, write_pgm, rng, (6, 8), 0.5, (1.0, 2.0))
    model = build_model(TrainConfig(seed=3))
    probs = predict_grid(model, occ, window_resolution=1.0)
    assert probs.shape == (3, 4, 8)
    assert probs.min() > 0.0
    assert np.abs(probs.sum(axis=2) - 1.0).max() < 1e-9

    # cell values come from a window centered on that cell
    row, col = 1, 2
    cx = occ.origin_x + (col + 0.5) * 1.0
    cy = occ.origin_y + (row + 0.5) * 1.0
    window = extract_window(occ, cx, cy, 1.0).astype(np.float32)
    model.eval()
    with torch.no_grad():
        raw = model(torch.from_numpy(window[None])).numpy()[0].astype(np.float64)
    expected = np.maximum(raw, PROB_FLOOR)
    expected /= expected.sum()
    assert np.abs(probs[row, col] - expected).max() < 1e-9

    again = predict_grid(model, occ, window_resolution=1.0)
    assert np.array_equal(probs, again)
    small_batches = predict_grid(model, occ, window_resolution=1.0,
                                 batch_size=3)
    assert np.abs(probs - small_batches).max() < 1e-6


def test_write_bff1_standalone_parse(tmp_path):
    rng = np.random.default_rng(5)
    probs = rng.dirichlet(np.ones(3), size=(2, 4)).astype(np.float32)
    path = tmp_path / "tiny.bff"
    write_bff1(path, width=4, height=2, resolution=0.75,
               origin_x=-1.0, origin_y=9.5, probs=probs,
               annotations={"provenance": "prior", "note": "hello"})
    blob = path.read_bytes()
    magic, w, h, k, res, ox, oy = struct.unpack("<4sIIIddd", blob[:40])
    assert magic == b"BFF1"
    assert (w, h, k) == (4, 2, 3)
    assert (res, ox, oy) == (0.75, -1.0, 9.5)
    payload = np.frombuffer(blob[40:40 + 4 * 2 * 4 * 3], dtype="<f4")
    assert np.array_equal(payload.reshape(2, 4, 3), probs)
    trailer = blob[40 + 4 * 2 * 4 * 3:].decode("utf-8")
    assert "provenance: prior\n" in trailer
    assert "note: hello\n" in trailer


def test_export_prior_loads_in_core(tmp_path, write_pgm):
    pedflow = pytest.importorskip("pedflow")
    rng = np.random.default_rng(6)
    occ = random_map(tmp_path, write_pgm, rng, (6, 8), 0.5, (1.0, 2.0))
    model = build_model(TrainConfig(seed=3))
    out = tmp_path / "prior.bff"
    width, height = export_prior(model, occ, window_resolution=1.0,
                                 out_path=out, annotations={"note": "x"})
    assert (width, height) == (4, 3)

    grid = pedflow.load_prior(out)
    assert grid.geometry == pedflow.Geometry(4, 3, 1.0, 1.0, 2.0)
    assert grid.provenance == "prior"
    assert grid.repaired_cells == 0
    assert grid.probs.min() > 0.0

    geometry, payload, annotations = pedflow.read_bff1(out)
    assert annotations["provenance"] == "prior"
    assert annotations["generator"] == "prior-trainer"
    assert annotations["note"] == "x"
    expected = predict_grid(model, occ, window_resolution=1.0)
    assert np.array_equal(payload, expected.astype(np.float32))
