"""Training objective: least-squares adversarial losses, feature matching,
mel reconstruction, and the warmup-gated auxiliary mel loss, plus a torch
mel analysis that mirrors the numpy one in :mod:`promptvoc.dsp`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn
import torch.nn.functional as F

from .dsp import MelConfig, mel_filterbank, num_frames


@dataclass(frozen=True)
class LossWeights:
    adv: float = 1.0
    feat_match: float = 2.0
    mel: float = 45.0
    aux_mel: float = 60.0
    aux_warmup_steps: int = 2000

    def __post_init__(self):
        for name in ("adv", "feat_match", "mel", "aux_mel"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} weight must be >= 0")


def lsgan_d_loss(real_scores, fake_scores) -> torch.Tensor:
    """Sum over sub-discriminators of mean((real-1)^2) + mean(fake^2)."""
    total = 0.0
    for r, f in zip(real_scores, fake_scores):
        total = total + torch.mean((r - 1.0) ** 2) + torch.mean(f**2)
    return total


def lsgan_g_loss(fake_scores) -> torch.Tensor:
    """Sum over sub-discriminators of mean((fake-1)^2)."""
    total = 0.0
    for f in fake_scores:
        total = total + torch.mean((f - 1.0) ** 2)
    return total


def feature_matching_loss(real_feats, fake_feats) -> torch.Tensor:
    """Per-layer mean L1, averaged over layers, summed over sub-discriminators."""
    total = 0.0
    for real_layers, fake_layers in zip(real_feats, fake_feats):
        if len(real_layers) != len(fake_layers):
            raise ValueError("feature lists are not congruent")
        layer_sum = 0.0
        for r, f in zip(real_layers, fake_layers):
            if r.shape != f.shape:
                raise ValueError(f"feature shape mismatch: {tuple(r.shape)} vs {tuple(f.shape)}")
            layer_sum = layer_sum + torch.mean(torch.abs(r - f))
        total = total + layer_sum / len(real_layers)
    return total


def mel_l1(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean absolute difference between two mel matrices of equal shape."""
    if pred.shape != target.shape:
        raise ValueError(f"mel shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    return torch.mean(torch.abs(pred - target))


def aux_weight(step: int, w: LossWeights) -> float:
    """Auxiliary mel coefficient: full weight during warmup, 0 afterwards."""
    if step < 0:
        raise ValueError("step must be >= 0")
    return w.aux_mel if step < w.aux_warmup_steps else 0.0


class TorchMel(nn.Module):
    """Differentiable log-mel matching dsp.mel_spectrogram's convention."""

    def __init__(self, cfg: MelConfig | None = None):
        super().__init__()
        self.cfg = cfg or MelConfig()
        window = np.hanning(self.cfg.win + 1)[: self.cfg.win]
        pad = self.cfg.n_fft - self.cfg.win
        window = np.pad(window, (pad // 2, pad - pad // 2))
        self.register_buffer("window", torch.tensor(window, dtype=torch.float32))
        fb = mel_filterbank(self.cfg).T  # (n_bins, n_mels)
        self.register_buffer("fb", torch.tensor(fb, dtype=torch.float32))

    def forward(self, wav: torch.Tensor) -> torch.Tensor:
        cfg = self.cfg
        unbatched = wav.dim() == 1
        if unbatched:
            wav = wav.unsqueeze(0)
        n = wav.shape[-1]
        frames = num_frames(n, cfg.hop)
        x = F.pad(wav, (0, frames * cfg.hop - n))
        half = cfg.n_fft // 2
        x = F.pad(x.unsqueeze(1), (half, half), mode="reflect").squeeze(1)
        segs = x.unfold(-1, cfg.n_fft, cfg.hop)[:, :frames, :] * self.window
        mag = torch.abs(torch.fft.rfft(segs, dim=-1))
        mel = torch.log(torch.clamp(mag @ self.fb, min=cfg.log_floor))
        return mel.squeeze(0) if unbatched else mel
