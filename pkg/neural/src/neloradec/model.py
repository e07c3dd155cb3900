"""Joint denoise + classify networks over symbol spectrograms.

Two convolutional networks trained together: an encoder-decoder with skip
connections that maps a noisy 2-channel spectrogram to its clean version,
and a classifier that reads the denoised tensor and emits one logit per
symbol value.  Strided dimensions pool only the frequency axis; the 25 time
frames are short enough to keep at full resolution throughout the denoiser.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from .dataio import Geometry
from .spectrogram import SpectrogramConfig


def _conv_block(c_in: int, c_out: int, stride: tuple[int, int] = (1, 1)) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(c_in, c_out, kernel_size=3, stride=stride, padding=1),
        nn.BatchNorm2d(c_out),
        nn.ReLU(inplace=True),
    )


def _up_block(c_in: int, c_out: int) -> nn.ConvTranspose2d:
    # kernel (4, 3) with stride (2, 1) doubles frequency, preserves time
    return nn.ConvTranspose2d(c_in, c_out, kernel_size=(4, 3),
                              stride=(2, 1), padding=(1, 1))


class Denoiser(nn.Module):
    """Four frequency-halving encoder levels mirrored by skip-fed decoders."""

    def __init__(self, base_channels: int = 12):
        super().__init__()
        b = base_channels
        c1, c2, c3, c4 = b, 2 * b, 4 * b, 4 * b
        self.down1 = _conv_block(2, c1, stride=(2, 1))
        self.down2 = _conv_block(c1, c2, stride=(2, 1))
        self.down3 = _conv_block(c2, c3, stride=(2, 1))
        self.down4 = _conv_block(c3, c4, stride=(2, 1))
        self.mid = _conv_block(c4, c4)
        self.up4 = _up_block(c4, c3)
        self.fuse3 = _conv_block(2 * c3, c3)
        self.up3 = _up_block(c3, c2)
        self.fuse2 = _conv_block(2 * c2, c2)
        self.up2 = _up_block(c2, c1)
        self.fuse1 = _conv_block(2 * c1, c1)
        self.up1 = _up_block(c1, c1)
        self.out = nn.Conv2d(c1, 2, kernel_size=3, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        d1 = self.down1(x)
        d2 = self.down2(d1)
        d3 = self.down3(d2)
        d4 = self.mid(self.down4(d3))
        u = self.fuse3(torch.cat([self.up4(d4), d3], dim=1))
        u = self.fuse2(torch.cat([self.up3(u), d2], dim=1))
        u = self.fuse1(torch.cat([self.up2(u), d1], dim=1))
        return self.out(self.up1(u))


class Classifier(nn.Module):
    """Three strided conv blocks, global average pool, linear to 2^sf logits."""

    def __init__(self, n_classes: int, base_channels: int = 12):
        super().__init__()
        b = base_channels
        self.features = nn.Sequential(
            _conv_block(2, 2 * b, stride=(2, 1)),
            _conv_block(2 * b, 4 * b, stride=(2, 2)),
            _conv_block(4 * b, 8 * b, stride=(2, 2)),
            nn.AdaptiveAvgPool2d(1),
            nn.Flatten(),
        )
        self.head = nn.Linear(8 * b, n_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(x))


class NeloraNet(nn.Module):
    """Denoiser feeding the classifier; forward returns (denoised, logits)."""

    def __init__(self, sf: int, base_channels: int = 12):
        super().__init__()
        geo = Geometry(sf)
        if geo.n_chips % 16 != 0:
            raise ValueError(f"frequency axis {geo.n_chips} must divide by 16")
        self.sf = sf
        self.base_channels = base_channels
        self.cfg = SpectrogramConfig(sf)
        self.denoiser = Denoiser(base_channels)
        self.classifier = Classifier(geo.n_chips, base_channels)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        expected = (2, self.cfg.fft_bins, self.cfg.frames)
        if tuple(x.shape[1:]) != expected:
            raise ValueError(f"input shape {tuple(x.shape[1:])} != {expected}")
        denoised = self.denoiser(x)
        return denoised, self.classifier(denoised)
