"""Multi-period and multi-scale waveform discriminators."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn
import torch.nn.functional as F

from .config import ModelConfig

MPD_PERIODS = (2, 3, 5, 7, 11)


@dataclass
class DiscOutputs:
    """Scores and per-layer features, one entry per sub-discriminator."""

    scores: list
    feats: list


def _as_batched(w: torch.Tensor) -> torch.Tensor:
    if w.dim() == 1:
        w = w.unsqueeze(0)
    if w.numel() == 0:
        raise ValueError("discriminator input must be non-empty")
    return w.unsqueeze(1)  # (B, 1, T)


class PeriodDiscriminator(nn.Module):
    """Reshapes the waveform to (T/p, p) and applies strided 2-D convs."""

    def __init__(self, period: int, base_channels: int = 32):
        super().__init__()
        self.period = period
        c = base_channels
        chans = [1, c, 4 * c, 8 * c, 16 * c, 16 * c]
        chans = [min(ch, 1024) if ch > 1 else ch for ch in chans]
        self.convs = nn.ModuleList(
            nn.Conv2d(chans[i], chans[i + 1], (5, 1), (3, 1), padding=(2, 0))
            for i in range(len(chans) - 1)
        )
        self.post = nn.Conv2d(chans[-1], 1, (3, 1), 1, padding=(1, 0))

    def forward(self, w: torch.Tensor):
        x = _as_batched(w)
        b, _, t = x.shape
        if t % self.period != 0:
            pad = self.period - t % self.period
            x = F.pad(x, (0, pad), mode="reflect")
            t = t + pad
        x = x.view(b, 1, t // self.period, self.period)
        feats = []
        for conv in self.convs:
            x = F.leaky_relu(conv(x), 0.1)
            feats.append(x)
        score = self.post(x)
        feats.append(score)
        return score, feats


class ScaleDiscriminator(nn.Module):
    """Stacked grouped 1-D convs over a (possibly pooled) waveform."""

    def __init__(self, base_channels: int = 16):
        super().__init__()
        c = base_channels
        self.convs = nn.ModuleList(
            [
                nn.Conv1d(1, c, 15, 1, padding=7),
                nn.Conv1d(c, 2 * c, 41, 2, groups=2, padding=20),
                nn.Conv1d(2 * c, 4 * c, 41, 4, groups=4, padding=20),
                nn.Conv1d(4 * c, 4 * c, 41, 4, groups=4, padding=20),
                nn.Conv1d(4 * c, 4 * c, 5, 1, padding=2),
            ]
        )
        self.post = nn.Conv1d(4 * c, 1, 3, 1, padding=1)

    def forward(self, x: torch.Tensor):
        feats = []
        for conv in self.convs:
            x = F.leaky_relu(conv(x), 0.1)
            feats.append(x)
        score = self.post(x)
        feats.append(score)
        return score, feats


class MultiPeriodDiscriminator(nn.Module):
    def __init__(self, cfg: ModelConfig | None = None):
        super().__init__()
        base = cfg.mpd_channels if cfg is not None else 32
        self.subs = nn.ModuleList(PeriodDiscriminator(p, base) for p in MPD_PERIODS)

    def forward(self, w: torch.Tensor) -> DiscOutputs:
        scores, feats = [], []
        for sub in self.subs:
            s, f = sub(w)
            scores.append(s)
            feats.append(f)
        return DiscOutputs(scores=scores, feats=feats)


class MultiScaleDiscriminator(nn.Module):
    """Raw, 2x and 4x average-pooled scales."""

    def __init__(self, cfg: ModelConfig | None = None):
        super().__init__()
        base = cfg.msd_channels if cfg is not None else 16
        self.subs = nn.ModuleList(ScaleDiscriminator(base) for _ in range(3))
        self.pool = nn.AvgPool1d(2, 2, ceil_mode=True)

    def forward(self, w: torch.Tensor) -> DiscOutputs:
        x = _as_batched(w)
        scores, feats = [], []
        for i, sub in enumerate(self.subs):
            if i > 0:
                x = self.pool(x)
            s, f = sub(x)
            scores.append(s)
            feats.append(f)
        return DiscOutputs(scores=scores, feats=feats)
