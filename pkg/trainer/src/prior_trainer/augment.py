"""Spatial augmentations with the matching direction-bin permutations.

Windows live on a row 0 = minimum-y lattice and targets are distributions
over 8 heading bins centered at (i-1) * pi/4 for bins i = 1..8. Every
spatial transform of the window therefore induces an exact permutation of
the target vector:

  quarter turn counterclockwise  bin i -> i + 2 (mod 8)
  mirror across the vertical axis (x -> -x)   (1..8) -> (5,4,3,2,1,8,7,6)
  mirror across the horizontal axis (y -> -y) (1..8) -> (1,8,7,6,5,4,3,2)

Ops apply horizontal flip, then vertical flip, then rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import TrainingPair

ROTATIONS = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)

# gather indices (0-based): new_target = target[INDEX]
_HFLIP_INDEX = np.array([4, 3, 2, 1, 0, 7, 6, 5])
_VFLIP_INDEX = np.array([0, 7, 6, 5, 4, 3, 2, 1])


@dataclass(frozen=True)
class AugmentationOp:
    hflip: bool = False
    vflip: bool = False
    rotation: float = 0.0

    def __post_init__(self):
        if self.rotation not in ROTATIONS:
            raise ValueError(
                f"rotation must be a quarter turn in {ROTATIONS}, "
                f"got {self.rotation!r}"
            )

    @property
    def quarter_turns(self) -> int:
        return ROTATIONS.index(self.rotation)


def rotation_index(quarter_turns: int, k: int = 8) -> np.ndarray:
    """Gather index permuting a target under counterclockwise rotation."""
    if k != 8:
        raise ValueError(f"direction permutations are defined for k=8, got {k}")
    return (np.arange(8) - 2 * quarter_turns) % 8


def augment_arrays(window: np.ndarray, target: np.ndarray,
                   op: AugmentationOp) -> tuple[np.ndarray, np.ndarray]:
    """Transform raw (window, target) arrays; see module docstring."""
    if target.shape[-1] != 8:
        raise ValueError(
            f"direction permutations are defined for k=8, got {target.shape[-1]}"
        )
    if op.hflip:
        window = window[..., :, ::-1]
        target = target[..., _HFLIP_INDEX]
    if op.vflip:
        window = window[..., ::-1, :]
        target = target[..., _VFLIP_INDEX]
    turns = op.quarter_turns
    if turns:
        # row 0 = min y, so a counterclockwise world rotation is rot90(k=-1)
        window = np.rot90(window, k=-turns, axes=(-2, -1))
        target = target[..., rotation_index(turns)]
    return np.ascontiguousarray(window), np.ascontiguousarray(target)


def augment(pair: TrainingPair, op: AugmentationOp) -> TrainingPair:
    window, target = augment_arrays(pair.window, pair.target, op)
    return TrainingPair(window, target)


def random_op(rng: np.random.Generator) -> AugmentationOp:
    """Flips with probability 1/2 each, uniform quarter-turn rotation."""
    return AugmentationOp(
        hflip=bool(rng.integers(0, 2)),
        vflip=bool(rng.integers(0, 2)),
        rotation=ROTATIONS[int(rng.integers(0, 4))],
    )
