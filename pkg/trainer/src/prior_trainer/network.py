"""Dense-block encoder/decoder mapping a 64x64 occupancy window to a
k-vector of heading scores.

The body follows the fully convolutional DenseNet layout: dense blocks
whose layers each contribute `growth` feature maps, pooling transitions
down, transposed-convolution transitions up with skip concatenation, and
a 1x1 projection head. The scalar-per-heading output is read off as the
mean of the center 2x2 of the projected map, which is symmetric around
the window center (the lattice has no single center sample). The head is
linear; outputs are normalized onto the simplex only at export time.
"""

from __future__ import annotations

import torch
from torch import nn

WINDOW_SIZE = 64


class _DenseLayer(nn.Module):
    def __init__(self, in_channels: int, growth: int):
        super().__init__()
        self.norm = nn.BatchNorm2d(in_channels)
        self.conv = nn.Conv2d(in_channels, growth, kernel_size=3, padding=1,
                              bias=False)

    def forward(self, x):
        return self.conv(torch.relu(self.norm(x)))


class _DenseBlock(nn.Module):
    """Each layer sees all previous features; returns (everything, new)."""

    def __init__(self, in_channels: int, growth: int, n_layers: int):
        super().__init__()
        self.layers = nn.ModuleList(
            _DenseLayer(in_channels + i * growth, growth)
            for i in range(n_layers)
        )
        self.out_channels = in_channels + n_layers * growth
        self.new_channels = n_layers * growth

    def forward(self, x):
        features = [x]
        new = []
        for layer in self.layers:
            out = layer(torch.cat(features, dim=1))
            features.append(out)
            new.append(out)
        return torch.cat(features, dim=1), torch.cat(new, dim=1)


class _TransitionDown(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.norm = nn.BatchNorm2d(channels)
        self.conv = nn.Conv2d(channels, channels, kernel_size=1, bias=False)
        self.pool = nn.MaxPool2d(2)

    def forward(self, x):
        return self.pool(self.conv(torch.relu(self.norm(x))))


class _TransitionUp(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.conv = nn.ConvTranspose2d(channels, channels, kernel_size=3,
                                       stride=2, padding=1, output_padding=1)

    def forward(self, x):
        return self.conv(x)


class PriorNet(nn.Module):
    """Defaults are sized for tens-of-thousands-of-pairs datasets on CPU."""

    def __init__(self, k: int = 8, first_channels: int = 16, growth: int = 8,
                 down_layers: tuple[int, ...] = (2, 2, 2),
                 bottleneck_layers: int = 2):
        super().__init__()
        if k < 2:
            raise ValueError("k must be at least 2")
        self.k = k
        self.stem = nn.Conv2d(1, first_channels, kernel_size=3, padding=1)

        channels = first_channels
        self.down_blocks = nn.ModuleList()
        self.downs = nn.ModuleList()
        skip_channels = []
        for n_layers in down_layers:
            block = _DenseBlock(channels, growth, n_layers)
            self.down_blocks.append(block)
            skip_channels.append(block.out_channels)
            self.downs.append(_TransitionDown(block.out_channels))
            channels = block.out_channels

        self.bottleneck = _DenseBlock(channels, growth, bottleneck_layers)
        channels = self.bottleneck.new_channels

        self.ups = nn.ModuleList()
        self.up_blocks = nn.ModuleList()
        for i, n_layers in enumerate(reversed(down_layers)):
            self.ups.append(_TransitionUp(channels))
            block = _DenseBlock(channels + skip_channels[-1 - i], growth,
                                n_layers)
            self.up_blocks.append(block)
            last = i == len(down_layers) - 1
            channels = block.out_channels if last else block.new_channels

        self.head = nn.Conv2d(channels, k, kernel_size=1)

    def forward(self, x):
        if x.dim() == 3:
            x = x.unsqueeze(1)
        if x.shape[-2:] != (WINDOW_SIZE, WINDOW_SIZE):
            raise ValueError(
                f"expected {WINDOW_SIZE}x{WINDOW_SIZE} windows, "
                f"got {tuple(x.shape[-2:])}"
            )
        x = self.stem(x)
        skips = []
        for block, down in zip(self.down_blocks, self.downs):
            full, _ = block(x)
            skips.append(full)
            x = down(full)
        _, x = self.bottleneck(x)
        last = len(self.ups) - 1
        for i, (up, block) in enumerate(zip(self.ups, self.up_blocks)):
            x = up(x)
            x = torch.cat([x, skips[-1 - i]], dim=1)
            full, new = block(x)
            x = full if i == last else new
        x = self.head(x)
        half = WINDOW_SIZE // 2
        center = x[:, :, half - 1:half + 1, half - 1:half + 1]
        return center.mean(dim=(2, 3))
