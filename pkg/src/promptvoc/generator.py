"""Waveform generator: transposed-conv upsampling with anti-aliased
multi-periodicity (AMP) blocks whose Snake activations are conditioned on
a speaker vector.  A HifiGAN-style variant (leaky-ReLU residual blocks,
no anti-aliasing) is available for ablations.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn
import torch.nn.functional as F

from .activations import AdaptiveSnake, Snake
from .config import ModelConfig
from .dsp import design_lowpass


def _init_conv(m):
    if isinstance(m, (nn.Conv1d, nn.ConvTranspose1d)):
        nn.init.normal_(m.weight, 0.0, 0.01)
        if m.bias is not None:
            nn.init.zeros_(m.bias)


def _activation_filter_taps() -> torch.Tensor:
    # Short Kaiser half-band for the 2x activation sandwich; cheap on CPU.
    f = design_lowpass(0.35, 0.3, 45.0)
    return torch.tensor(f.taps, dtype=torch.float32)


class AntiAliasedActivation(nn.Module):
    """Runs a pointwise activation at 2x rate between low-pass filters.

    Upsampling is a stride-2 transposed depthwise convolution (equivalent
    to zero-stuffing + filtering), downsampling a stride-2 depthwise
    convolution (filter + decimate).
    """

    def __init__(self, activation: nn.Module):
        super().__init__()
        self.activation = activation
        self.register_buffer("taps", _activation_filter_taps())

    def forward(self, x: torch.Tensor, s: torch.Tensor | None = None) -> torch.Tensor:
        c = x.shape[1]
        k = self.taps.numel()
        w = self.taps.to(x.dtype).view(1, 1, -1).expand(c, 1, -1)
        up = F.conv_transpose1d(
            x, 2.0 * w, stride=2, padding=k // 2, output_padding=1, groups=c
        )
        if isinstance(self.activation, AdaptiveSnake):
            up = self.activation(up, s)
        else:
            up = self.activation(up)
        return F.conv1d(F.pad(up, (k // 2, k // 2)), w, stride=2, groups=c)


def _make_activation(channels: int, cfg: ModelConfig) -> nn.Module:
    if cfg.activation == "adaptive_snake":
        return AdaptiveSnake(channels, cfg.cond_dim)
    return Snake(channels)


class AMPBlock(nn.Module):
    """Residual dilated-conv stack with anti-aliased Snake activations."""

    def __init__(self, channels: int, kernel: int, dilations, cfg: ModelConfig):
        super().__init__()
        self.convs1 = nn.ModuleList(
            nn.Conv1d(channels, channels, kernel, dilation=d, padding=(kernel - 1) * d // 2)
            for d in dilations
        )
        self.convs2 = nn.ModuleList(
            nn.Conv1d(channels, channels, kernel, padding=kernel // 2) for _ in dilations
        )
        self.acts1 = nn.ModuleList(
            AntiAliasedActivation(_make_activation(channels, cfg)) for _ in dilations
        )
        self.acts2 = nn.ModuleList(
            AntiAliasedActivation(_make_activation(channels, cfg)) for _ in dilations
        )
        self.apply(_init_conv)

    def forward(self, x: torch.Tensor, s: torch.Tensor) -> torch.Tensor:
        for c1, c2, a1, a2 in zip(self.convs1, self.convs2, self.acts1, self.acts2):
            xt = a1(x, s)
            xt = c1(xt)
            xt = a2(xt, s)
            xt = c2(xt)
            x = x + xt
        return x


class HifiResBlock(nn.Module):
    """HifiGAN residual block: leaky-ReLU, no anti-aliasing, no conditioning."""

    def __init__(self, channels: int, kernel: int, dilations):
        super().__init__()
        self.convs1 = nn.ModuleList(
            nn.Conv1d(channels, channels, kernel, dilation=d, padding=(kernel - 1) * d // 2)
            for d in dilations
        )
        self.convs2 = nn.ModuleList(
            nn.Conv1d(channels, channels, kernel, padding=kernel // 2) for _ in dilations
        )
        self.apply(_init_conv)

    def forward(self, x: torch.Tensor, s: torch.Tensor) -> torch.Tensor:
        for c1, c2 in zip(self.convs1, self.convs2):
            xt = c2(F.leaky_relu(c1(F.leaky_relu(x, 0.1)), 0.1))
            x = x + xt
        return x


class Generator(nn.Module):
    """Hidden frames (10 ms) to waveform; output length is frames * hop exactly."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        c = cfg.base_channels
        self.input_conv = nn.Conv1d(cfg.attn_dim, c, 7, padding=3)

        self.upsamples = nn.ModuleList()
        self.blocks = nn.ModuleList()
        for factor, kernel in zip(cfg.upsample_factors, cfg.upsample_kernels):
            pad = -(-(kernel - factor) // 2)  # ceil
            out_pad = 2 * pad - (kernel - factor)
            self.upsamples.append(
                nn.ConvTranspose1d(c, c // 2, kernel, stride=factor, padding=pad,
                                   output_padding=out_pad)
            )
            c //= 2
            if cfg.architecture == "bigvgan":
                stage = nn.ModuleList(
                    AMPBlock(c, k, cfg.amp_dilations, cfg) for k in cfg.amp_kernel_sizes
                )
            else:
                stage = nn.ModuleList(
                    HifiResBlock(c, k, cfg.amp_dilations) for k in cfg.amp_kernel_sizes
                )
            self.blocks.append(stage)

        if cfg.architecture == "bigvgan":
            self.final_act = AntiAliasedActivation(_make_activation(c, cfg))
        else:
            self.final_act = None
        self.output_conv = nn.Conv1d(c, 1, 7, padding=3)
        self.input_conv.apply(_init_conv)
        self.upsamples.apply(_init_conv)
        self.output_conv.apply(_init_conv)

    def forward(self, hidden: torch.Tensor, s: torch.Tensor) -> torch.Tensor:
        """hidden: (B, T, attn_dim) or (T, attn_dim); s: (B, d) or (d,)."""
        unbatched = hidden.dim() == 2
        if unbatched:
            hidden = hidden.unsqueeze(0)
        if hidden.shape[-1] != self.cfg.attn_dim:
            raise ValueError(
                f"hidden dim {hidden.shape[-1]} != configured attn_dim {self.cfg.attn_dim}"
            )
        x = self.input_conv(hidden.transpose(1, 2))
        for upsample, stage in zip(self.upsamples, self.blocks):
            x = upsample(x)
            x = sum(block(x, s) for block in stage) / len(stage)
        if self.final_act is not None:
            x = self.final_act(x, s)
        else:
            x = F.leaky_relu(x, 0.1)
        wav = torch.tanh(self.output_conv(x)).squeeze(1)
        return wav.squeeze(0) if unbatched else wav


def count_params(cfg: ModelConfig) -> int:
    """Trainable scalar count of frontend + prenet + generator (no discriminators)."""
    from .frontend import Frontend

    frontend = Frontend(cfg)
    generator = Generator(cfg)
    return sum(
        p.numel() for m in (frontend, generator) for p in m.parameters() if p.requires_grad
    )
