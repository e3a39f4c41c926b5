"""Binary grid containers: BFF1 (direction probabilities), BFC1 (direction
counts), BFFT (training pairs).

All containers are little-endian. Grid payloads are row-major with row 0 at
minimum world y and the direction index fastest. Each container may carry an
optional trailing annotation block: UTF-8 ``key: value`` lines after the
payload (provenance, skip tallies, thresholds). Writers are deterministic, so
rewriting unchanged data reproduces the file byte for byte.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .grids import Geometry

BFF1_MAGIC = b"BFF1"
BFC1_MAGIC = b"BFC1"
BFFT_MAGIC = b"BFFT"

_GRID_HEADER = struct.Struct("<4sIIIddd")   # magic, w, h, k, res, ox, oy
_PAIR_HEADER = struct.Struct("<4sIIId")     # magic, n, window size, k, res


class FormatError(Exception):
    """Bad magic, truncated payload, or malformed annotation block."""


def _encode_annotations(annotations: dict[str, str] | None) -> bytes:
    if not annotations:
        return b""
    lines = []
    for key, value in annotations.items():
        key = str(key)
        value = str(value)
        if ":" in key or "\n" in key or "\n" in value:
            raise ValueError(f"annotation {key!r} cannot contain ':' or newlines")
        lines.append(f"{key}: {value}\n")
    return "".join(lines).encode("utf-8")


def _decode_annotations(blob: bytes, path) -> dict[str, str]:
    if not blob:
        return {}
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: annotation block is not UTF-8") from exc
    annotations = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        if ":" not in line:
            raise FormatError(f"{path}: malformed annotation line {line!r}")
        key, value = line.split(":", 1)
        annotations[key.strip()] = value.strip()
    return annotations


def _read_exact(fh, n: int, path, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise FormatError(f"{path}: truncated {what} "
                          f"(wanted {n} bytes, got {len(data)})")
    return data


def write_bff1(path: str | os.PathLike, geometry: Geometry, probs,
               annotations: dict[str, str] | None = None) -> None:
    """Write direction probabilities as an f32 BFF1 container."""
    probs = np.ascontiguousarray(probs, dtype=np.float32)
    h, w, k = probs.shape
    if (w, h) != (geometry.width, geometry.height):
        raise ValueError("probs shape does not match geometry")
    with open(path, "wb") as fh:
        fh.write(_GRID_HEADER.pack(BFF1_MAGIC, w, h, k, geometry.resolution,
                                   geometry.origin_x, geometry.origin_y))
        fh.write(probs.tobytes())
        fh.write(_encode_annotations(annotations))


def read_bff1(path: str | os.PathLike):
    """Read a BFF1 container.

    Returns (geometry, probs, annotations) with probs float32 of shape
    (height, width, k). No validation beyond the container structure; see
    priors.load_prior for the simplex checks.
    """
    with open(path, "rb") as fh:
        header = _read_exact(fh, _GRID_HEADER.size, path, "header")
        magic, w, h, k, res, ox, oy = _GRID_HEADER.unpack(header)
        if magic != BFF1_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected BFF1")
        if w < 1 or h < 1 or k < 1:
            raise FormatError(f"{path}: degenerate dimensions {w}x{h}x{k}")
        payload = _read_exact(fh, w * h * k * 4, path, "probability payload")
        annotations = _decode_annotations(fh.read(), path)
    probs = np.frombuffer(payload, dtype="<f4").reshape(h, w, k)
    geometry = Geometry(w, h, res, ox, oy)
    return geometry, probs, annotations


def write_bfc1(path: str | os.PathLike, geometry: Geometry, counts,
               annotations: dict[str, str] | None = None) -> None:
    """Write direction counts as a u64 BFC1 container."""
    counts = np.asarray(counts)
    if counts.size and counts.min() < 0:
        raise ValueError("counts must be nonnegative")
    counts = np.ascontiguousarray(counts, dtype="<u8")
    h, w, k = counts.shape
    if (w, h) != (geometry.width, geometry.height):
        raise ValueError("counts shape does not match geometry")
    with open(path, "wb") as fh:
        fh.write(_GRID_HEADER.pack(BFC1_MAGIC, w, h, k, geometry.resolution,
                                   geometry.origin_x, geometry.origin_y))
        fh.write(counts.tobytes())
        fh.write(_encode_annotations(annotations))


def read_bfc1(path: str | os.PathLike):
    """Read a BFC1 container; returns (geometry, counts int64, annotations)."""
    with open(path, "rb") as fh:
        header = _read_exact(fh, _GRID_HEADER.size, path, "header")
        magic, w, h, k, res, ox, oy = _GRID_HEADER.unpack(header)
        if magic != BFC1_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected BFC1")
        if w < 1 or h < 1 or k < 1:
            raise FormatError(f"{path}: degenerate dimensions {w}x{h}x{k}")
        payload = _read_exact(fh, w * h * k * 8, path, "count payload")
        annotations = _decode_annotations(fh.read(), path)
    counts = np.frombuffer(payload, dtype="<u8").reshape(h, w, k)
    if counts.size and counts.max() > np.iinfo(np.int64).max:
        raise FormatError(f"{path}: count exceeds int64 range")
    geometry = Geometry(w, h, res, ox, oy)
    return geometry, counts.astype(np.int64), annotations


def write_bfft(path: str | os.PathLike, windows, targets,
               window_resolution: float,
               annotations: dict[str, str] | None = None) -> None:
    """Write supervised (occupancy window, transition target) pairs.

    windows: (n, size, size) occupancy in [0, 1]; targets: (n, k) simplex
    vectors. Stored as f32, window then target, pair by pair.
    """
    windows = np.ascontiguousarray(windows, dtype=np.float32)
    targets = np.ascontiguousarray(targets, dtype=np.float32)
    if windows.ndim != 3 or windows.shape[1] != windows.shape[2]:
        raise ValueError("windows must have shape (n, size, size)")
    if targets.ndim != 2 or targets.shape[0] != windows.shape[0]:
        raise ValueError("targets must have shape (n, k) matching windows")
    n, size, _ = windows.shape
    k = targets.shape[1]
    with open(path, "wb") as fh:
        fh.write(_PAIR_HEADER.pack(BFFT_MAGIC, n, size, k,
                                   float(window_resolution)))
        for i in range(n):
            fh.write(windows[i].tobytes())
            fh.write(targets[i].tobytes())
        fh.write(_encode_annotations(annotations))


def read_bfft(path: str | os.PathLike):
    """Read a BFFT container.

    Returns (windows, targets, window_resolution, annotations) with float32
    arrays of shape (n, size, size) and (n, k).
    """
    with open(path, "rb") as fh:
        header = _read_exact(fh, _PAIR_HEADER.size, path, "header")
        magic, n, size, k, res = _PAIR_HEADER.unpack(header)
        if magic != BFFT_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected BFFT")
        if size < 1 or k < 1:
            raise FormatError(f"{path}: degenerate pair dimensions")
        pair_bytes = (size * size + k) * 4
        payload = _read_exact(fh, n * pair_bytes, path, "pair payload")
        annotations = _decode_annotations(fh.read(), path)
    raw = np.frombuffer(payload, dtype="<f4").reshape(n, size * size + k)
    windows = raw[:, :size * size].reshape(n, size, size).copy()
    targets = raw[:, size * size:].copy()
    return windows, targets, res, annotations
