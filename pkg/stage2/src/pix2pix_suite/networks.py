"""Generator and discriminator architectures.

The generator is an encoder-decoder with skip connections that downsamples
all the way to a 1x1 bottleneck (8 down / 8 up at 256x256, shallower for
smaller inputs) and the discriminator is a patch-based convolutional
classifier over concatenated (condition, target) pairs.
"""

from __future__ import annotations

import torch
from torch import nn


def _down(in_ch, out_ch, normalize=True):
    layers = [nn.Conv2d(in_ch, out_ch, 4, stride=2, padding=1, bias=not normalize)]
    if normalize:
        layers.append(nn.InstanceNorm2d(out_ch))
    layers.append(nn.LeakyReLU(0.2, inplace=True))
    return nn.Sequential(*layers)


def _up(in_ch, out_ch, dropout=False):
    layers = [nn.ConvTranspose2d(in_ch, out_ch, 4, stride=2, padding=1, bias=False),
              nn.InstanceNorm2d(out_ch)]
    if dropout:
        layers.append(nn.Dropout(0.5))
    layers.append(nn.ReLU(inplace=True))
    return nn.Sequential(*layers)


def _channel_plan(base: int, depth: int) -> list[int]:
    return [min(base * (2 ** i), base * 8) for i in range(depth)]


class UNetGenerator(nn.Module):
    """Single-channel to single-channel translation with skip connections."""

    def __init__(self, image_size: int = 256, base_filters: int = 64):
        super().__init__()
        depth = image_size.bit_length() - 1  # down to a 1x1 bottleneck
        if depth < 2:
            raise ValueError("image_size must be at least 4")
        chans = _channel_plan(base_filters, depth)
        downs = [_down(1, chans[0], normalize=False)]
        for i in range(1, depth):
            # no norm at the 1x1 bottleneck
            downs.append(_down(chans[i - 1], chans[i], normalize=(i < depth - 1)))
        self.downs = nn.ModuleList(downs)
        ups = []
        for i in reversed(range(1, depth)):
            in_ch = chans[i] if i == depth - 1 else chans[i] * 2
            ups.append(_up(in_ch, chans[i - 1], dropout=(depth - 1 - i) < 3))
        self.ups = nn.ModuleList(ups)
        self.final = nn.Sequential(
            nn.ConvTranspose2d(chans[0] * 2, 1, 4, stride=2, padding=1),
            nn.Tanh())

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        for down in self.downs:
            x = down(x)
            skips.append(x)
        x = skips[-1]
        for i, up in enumerate(self.ups):
            x = up(x if i == 0 else torch.cat([x, skips[-1 - i]], dim=1))
        return self.final(torch.cat([x, skips[0]], dim=1))


class PatchDiscriminator(nn.Module):
    """Patch-level real/fake classifier on (condition, target) channel pairs."""

    def __init__(self, base_filters: int = 64):
        super().__init__()
        b = base_filters
        self.model = nn.Sequential(
            _down(2, b, normalize=False),
            _down(b, b * 2),
            _down(b * 2, b * 4),
            nn.Conv2d(b * 4, b * 8, 4, stride=1, padding=1, bias=False),
            nn.InstanceNorm2d(b * 8),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(b * 8, 1, 4, stride=1, padding=1))

    def forward(self, condition: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        return self.model(torch.cat([condition, target], dim=1))
