"""Supervised training pairs and the BFFT container reader.

The trainer deliberately owns its reader instead of importing the grid
toolkit: the byte format is the contract between the two packages.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

BFFT_MAGIC = b"BFFT"
_PAIR_HEADER = struct.Struct("<4sIIId")  # magic, n, window size, k, res

SIMPLEX_TOL = 1e-4


class PairFormatError(Exception):
    """Bad magic, truncated payload, or malformed annotations."""


@dataclass(frozen=True, eq=False)
class TrainingPair:
    """One (occupancy window, direction distribution) supervision example.

    window: square float array in [0, 1]; target: k-vector on the simplex.
    """

    window: np.ndarray
    target: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, TrainingPair):
            return NotImplemented
        return (np.array_equal(self.window, other.window)
                and np.array_equal(self.target, other.target))

    def __post_init__(self):
        window = np.asarray(self.window, dtype=np.float32)
        target = np.asarray(self.target, dtype=np.float32)
        if window.ndim != 2 or window.shape[0] != window.shape[1]:
            raise ValueError(f"window must be square, got {window.shape}")
        if window.size and (window.min() < 0.0 or window.max() > 1.0):
            raise ValueError("window values must lie in [0, 1]")
        if target.ndim != 1 or target.shape[0] < 2:
            raise ValueError(f"target must be a k-vector, got {target.shape}")
        if target.min() < 0.0 or abs(float(target.sum()) - 1.0) > SIMPLEX_TOL:
            raise ValueError("target must be a probability vector")
        window = window.copy()
        target = target.copy()
        window.flags.writeable = False
        target.flags.writeable = False
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "target", target)

    @property
    def k(self) -> int:
        return self.target.shape[0]


def _decode_annotations(blob: bytes, path) -> dict[str, str]:
    if not blob:
        return {}
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise PairFormatError(f"{path}: annotation block is not UTF-8") from exc
    annotations = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        if ":" not in line:
            raise PairFormatError(f"{path}: malformed annotation line {line!r}")
        key, value = line.split(":", 1)
        annotations[key.strip()] = value.strip()
    return annotations


def read_pair_file(path: str | os.PathLike):
    """Low-level BFFT read.

    Returns (windows, targets, window_resolution, annotations); float32
    arrays of shape (n, size, size) and (n, k).
    """
    with open(path, "rb") as fh:
        header = fh.read(_PAIR_HEADER.size)
        if len(header) != _PAIR_HEADER.size:
            raise PairFormatError(f"{path}: truncated header")
        magic, n, size, k, res = _PAIR_HEADER.unpack(header)
        if magic != BFFT_MAGIC:
            raise PairFormatError(f"{path}: bad magic {magic!r}, expected BFFT")
        if size < 1 or k < 1:
            raise PairFormatError(f"{path}: degenerate pair dimensions")
        pair_bytes = (size * size + k) * 4
        payload = fh.read(n * pair_bytes)
        if len(payload) != n * pair_bytes:
            raise PairFormatError(
                f"{path}: truncated payload (wanted {n * pair_bytes} bytes, "
                f"got {len(payload)})"
            )
        annotations = _decode_annotations(fh.read(), path)
    raw = np.frombuffer(payload, dtype="<f4").reshape(n, size * size + k)
    windows = raw[:, :size * size].reshape(n, size, size).copy()
    targets = raw[:, size * size:].copy()
    return windows, targets, res, annotations


def load_bfft(path: str | os.PathLike) -> list[TrainingPair]:
    """Load a pair container as a list of validated TrainingPair items."""
    windows, targets, _, _ = read_pair_file(path)
    return [TrainingPair(windows[i], targets[i]) for i in range(len(windows))]
