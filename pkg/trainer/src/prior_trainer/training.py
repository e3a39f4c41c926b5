"""Deterministic training loop: MSE against probability targets, Adam at a
fixed learning rate, per-sample random augmentation each epoch."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import torch
import yaml

from .augment import augment_arrays, random_op
from .data import TrainingPair
from .network import WINDOW_SIZE, PriorNet


class TrainingDivergedError(Exception):
    """Loss became non-finite; carries the epoch for diagnostics."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 120
    lr: float = 1e-3
    seed: int = 0
    k: int = 8
    resolution: float = 1.0
    batch_size: int = 4
    augment: bool = True
    first_channels: int = 16
    growth: int = 8
    down_layers: tuple[int, ...] = (2, 2, 2)
    bottleneck_layers: int = 2

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if not self.lr > 0:
            raise ValueError("lr must be positive")
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        object.__setattr__(self, "down_layers", tuple(self.down_layers))


# yaml 1.1 floats need a signed exponent ("1e+30"); coerce the numeric
# fields so the unsigned spelling works in config files too
_NUMERIC_FIELDS = {
    "epochs": int, "lr": float, "seed": int, "k": int, "resolution": float,
    "batch_size": int, "first_channels": int, "growth": int,
    "bottleneck_layers": int,
}


def load_config(path: str | os.PathLike) -> TrainConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a mapping")
    known = TrainConfig.__dataclass_fields__
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ValueError(f"{path}: unknown config keys {unknown}")
    for key, cast in _NUMERIC_FIELDS.items():
        if key in raw:
            try:
                raw[key] = cast(raw[key])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}: bad value for {key}: "
                                 f"{raw[key]!r}") from exc
    return TrainConfig(**raw)


@dataclass
class TrainResult:
    model: PriorNet
    losses: list[float] = field(default_factory=list)
    config: TrainConfig = TrainConfig()


def build_model(config: TrainConfig) -> PriorNet:
    torch.manual_seed(config.seed)
    return PriorNet(k=config.k, first_channels=config.first_channels,
                    growth=config.growth, down_layers=config.down_layers,
                    bottleneck_layers=config.bottleneck_layers)


def train(pairs: list[TrainingPair], config: TrainConfig) -> TrainResult:
    """Fit the network to the pairs; deterministic given config.seed."""
    if not pairs:
        raise ValueError("cannot train on an empty pair list")
    windows = np.stack([p.window for p in pairs]).astype(np.float32)
    targets = np.stack([p.target for p in pairs]).astype(np.float32)
    if windows.shape[1:] != (WINDOW_SIZE, WINDOW_SIZE):
        raise ValueError(
            f"training windows must be {WINDOW_SIZE}x{WINDOW_SIZE}, "
            f"got {windows.shape[1:]}"
        )
    if targets.shape[1] != config.k:
        raise ValueError(
            f"pairs have k={targets.shape[1]} but config.k={config.k}"
        )
    if config.augment and config.k != 8:
        raise ValueError("augmentation requires k=8; disable it otherwise")

    model = build_model(config)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    loss_fn = torch.nn.MSELoss()
    rng = np.random.default_rng(config.seed)
    n = len(pairs)

    losses = []
    model.train()
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            index = order[start:start + config.batch_size]
            batch_w = windows[index]
            batch_t = targets[index]
            if config.augment:
                batch_w = batch_w.copy()
                batch_t = batch_t.copy()
                for j in range(len(index)):
                    batch_w[j], batch_t[j] = augment_arrays(
                        batch_w[j], batch_t[j], random_op(rng))
            prediction = model(torch.from_numpy(batch_w))
            loss = loss_fn(prediction, torch.from_numpy(batch_t))
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    f"loss {float(loss.detach())!r} at epoch {epoch + 1} of "
                    f"{config.epochs}; lower the learning rate"
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * len(index)
        losses.append(total / n)
    return TrainResult(model=model, losses=losses, config=config)


def save_checkpoint(result: TrainResult, path: str | os.PathLike) -> None:
    from dataclasses import asdict

    torch.save({
        "config": asdict(result.config),
        "state_dict": result.model.state_dict(),
        "losses": result.losses,
    }, path)


def load_checkpoint(path: str | os.PathLike) -> TrainResult:
    payload = torch.load(path, weights_only=True, map_location="cpu")
    config = TrainConfig(**payload["config"])
    model = build_model(config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return TrainResult(model=model, losses=list(payload["losses"]),
                       config=config)
