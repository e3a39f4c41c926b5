import struct

import numpy as np
import pytest

from pedflow.formats import (
    FormatError,
    read_bfc1,
    read_bff1,
    read_bfft,
    write_bfc1,
    write_bff1,
    write_bfft,
)
from pedflow.grids import Geometry

GEO = Geometry(4, 3, 0.5, -1.0, 2.0)


def random_probs(rng, shape=(3, 4, 8)):
    flat = rng.dirichlet(np.ones(shape[2]), size=shape[0] * shape[1])
    return flat.reshape(shape).astype(np.float32)


def test_bff1_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(71)
    probs = random_probs(rng)
    first = tmp_path / "a.bff"
    write_bff1(first, GEO, probs, annotations={"provenance": "prior",
                                               "note": "unit test"})
    geometry, loaded, annotations = read_bff1(first)
    assert geometry == GEO
    assert loaded.dtype == np.float32
    assert np.array_equal(loaded, probs)
    assert annotations == {"provenance": "prior", "note": "unit test"}
    second = tmp_path / "b.bff"
    write_bff1(second, geometry, loaded, annotations)
    assert first.read_bytes() == second.read_bytes()


def test_bff1_header_layout(tmp_path):
    path = tmp_path / "h.bff"
    write_bff1(path, GEO, np.full((3, 4, 8), 0.125, dtype=np.float32))
    data = path.read_bytes()
    assert data[:4] == b"BFF1"
    w, h, k = struct.unpack_from("<III", data, 4)
    res, ox, oy = struct.unpack_from("<ddd", data, 16)
    assert (w, h, k) == (4, 3, 8)
    assert (res, ox, oy) == (0.5, -1.0, 2.0)
    assert len(data) == 40 + 4 * 3 * 8 * 4


def test_bff1_truncated_payload(tmp_path):
    path = tmp_path / "t.bff"
    write_bff1(path, GEO, np.full((3, 4, 8), 0.125, dtype=np.float32))
    clipped = tmp_path / "clipped.bff"
    clipped.write_bytes(path.read_bytes()[:60])
    with pytest.raises(FormatError):
        read_bff1(clipped)


def test_bff1_bad_magic(tmp_path):
    path = tmp_path / "bad.bff"
    path.write_bytes(b"NOPE" + b"\x00" * 60)
    with pytest.raises(FormatError):
        read_bff1(path)


def test_bfc1_round_trip(tmp_path):
    rng = np.random.default_rng(73)
    counts = rng.integers(0, 1 << 40, size=(3, 4, 8))
    path = tmp_path / "c.bfc"
    write_bfc1(path, GEO, counts, annotations={"skipped": "17"})
    geometry, loaded, annotations = read_bfc1(path)
    assert geometry == GEO
    assert loaded.dtype == np.int64
    assert np.array_equal(loaded, counts)
    assert annotations == {"skipped": "17"}
    again = tmp_path / "c2.bfc"
    write_bfc1(again, geometry, loaded, annotations)
    assert path.read_bytes() == again.read_bytes()
    assert path.read_bytes()[:4] == b"BFC1"


def test_bfc1_rejects_negative_counts(tmp_path):
    with pytest.raises((ValueError, OverflowError)):
        write_bfc1(tmp_path / "n.bfc", GEO, np.full((3, 4, 8), -1))


def test_bfft_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(79)
    windows = rng.uniform(0, 1, size=(5, 64, 64)).astype(np.float32)
    targets = rng.dirichlet(np.ones(8), size=5).astype(np.float32)
    first = tmp_path / "p.bfft"
    write_bfft(first, windows, targets, 0.4, annotations={"min_count": "10"})
    w2, t2, resolution, annotations = read_bfft(first)
    assert resolution == 0.4
    assert np.array_equal(w2, windows)
    assert np.array_equal(t2, targets)
    assert annotations == {"min_count": "10"}
    second = tmp_path / "p2.bfft"
    write_bfft(second, w2, t2, resolution, annotations)
    assert first.read_bytes() == second.read_bytes()


def test_bfft_header_and_size(tmp_path):
    path = tmp_path / "s.bfft"
    windows = np.zeros((2, 64, 64), dtype=np.float32)
    targets = np.full((2, 8), 0.125, dtype=np.float32)
    write_bfft(path, windows, targets, 1.0)
    data = path.read_bytes()
    assert data[:4] == b"BFFT"
    n, size, k = struct.unpack_from("<III", data, 4)
    (resolution,) = struct.unpack_from("<d", data, 16)
    assert (n, size, k) == (2, 64, 8)
    assert resolution == 1.0
    assert len(data) == 24 + 2 * (64 * 64 * 4 + 8 * 4)


def test_bfft_zero_pairs(tmp_path):
    path = tmp_path / "empty.bfft"
    write_bfft(path, np.zeros((0, 64, 64), dtype=np.float32),
               np.zeros((0, 8), dtype=np.float32), 0.4)
    windows, targets, resolution, _ = read_bfft(path)
    assert windows.shape == (0, 64, 64)
    assert targets.shape == (0, 8)
    assert resolution == 0.4


def test_bfft_truncated(tmp_path):
    path = tmp_path / "w.bfft"
    write_bfft(path, np.zeros((2, 64, 64), dtype=np.float32),
               np.full((2, 8), 0.125, dtype=np.float32), 1.0)
    cut = tmp_path / "cut.bfft"
    cut.write_bytes(path.read_bytes()[:-16])
    with pytest.raises(FormatError):
        read_bfft(cut)


def test_annotation_order_preserved(tmp_path):
    path = tmp_path / "o.bff"
    annotations = {"zeta": "1", "alpha": "2", "mid dle": "3"}
    write_bff1(path, GEO, np.full((3, 4, 8), 0.125, dtype=np.float32),
               annotations)
    _, _, loaded = read_bff1(path)
    assert list(loaded.items()) == list(annotations.items())
