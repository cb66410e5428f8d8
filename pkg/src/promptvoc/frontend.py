"""Conformer frontend: prompt CNN prenet, content-stream Conformer blocks
with position-agnostic cross-attention over prompt features, and the
auxiliary mel projection head.

The cross-attention path carries no positional encoding on either side,
so its output is invariant to permutations of the prompt frames; relative
positional information is used only in the content self-attention.
"""

from __future__ import annotations

import math

import torch
from torch import nn
import torch.nn.functional as F

from .config import ModelConfig


class PromptPrenet(nn.Module):
    """Stack of two-conv CNN blocks with 1/sqrt(2)-scaled residuals."""

    def __init__(self, in_dim: int, dims, kernel: int = 5):
        super().__init__()
        self.blocks = nn.ModuleList()
        self.residuals = nn.ModuleList()
        prev = in_dim
        for dim in dims:
            self.blocks.append(
                nn.Sequential(
                    nn.Conv1d(prev, dim, kernel, padding=kernel // 2),
                    nn.LeakyReLU(0.1),
                    nn.Conv1d(dim, dim, kernel, padding=kernel // 2),
                )
            )
            self.residuals.append(
                nn.Identity() if prev == dim else nn.Conv1d(prev, dim, 1, bias=False)
            )
            prev = dim
        self.out_dim = prev

    def forward(self, p: torch.Tensor) -> torch.Tensor:
        # p: (B, P, in_dim) -> (B, P, out_dim)
        h = p.transpose(1, 2)
        for block, res in zip(self.blocks, self.residuals):
            h = (block(h) + res(h)) / math.sqrt(2.0)
        return h.transpose(1, 2)


class RelPositionSelfAttention(nn.Module):
    """Multi-head self-attention with a learned relative position bias."""

    def __init__(self, dim: int, n_heads: int, dropout: float = 0.0, max_rel: int = 64):
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = dim // n_heads
        self.max_rel = max_rel
        self.qkv = nn.Linear(dim, 3 * dim)
        self.out = nn.Linear(dim, dim)
        self.rel_bias = nn.Parameter(torch.zeros(n_heads, 2 * max_rel + 1))
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, t, d = x.shape
        q, k, v = self.qkv(x).chunk(3, dim=-1)
        q = q.view(b, t, self.n_heads, self.head_dim).transpose(1, 2)
        k = k.view(b, t, self.n_heads, self.head_dim).transpose(1, 2)
        v = v.view(b, t, self.n_heads, self.head_dim).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)

        pos = torch.arange(t, device=x.device)
        rel = (pos[None, :] - pos[:, None]).clamp(-self.max_rel, self.max_rel) + self.max_rel
        scores = scores + self.rel_bias[:, rel]
        attn = self.dropout(torch.softmax(scores, dim=-1))
        y = (attn @ v).transpose(1, 2).reshape(b, t, d)
        return self.out(y)


class PositionAgnosticCrossAttention(nn.Module):
    """Scaled-dot-product attention over prompt frames with no positional encoding."""

    def __init__(self, dim: int, kv_dim: int, n_heads: int, dropout: float = 0.0):
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = dim // n_heads
        self.q_proj = nn.Linear(dim, dim)
        self.k_proj = nn.Linear(kv_dim, dim)
        self.v_proj = nn.Linear(kv_dim, dim)
        self.out = nn.Linear(dim, dim)
        self.dropout = nn.Dropout(dropout)

    def attention_weights(self, q_hidden: torch.Tensor, kv_hidden: torch.Tensor) -> torch.Tensor:
        """(B, heads, T, P) softmax weights; exposed for diagnostics/tests."""
        if kv_hidden.shape[1] < 1:
            raise ValueError("cross-attention needs at least one key/value frame")
        b, t, _ = q_hidden.shape
        p = kv_hidden.shape[1]
        q = self.q_proj(q_hidden).view(b, t, self.n_heads, self.head_dim).transpose(1, 2)
        k = self.k_proj(kv_hidden).view(b, p, self.n_heads, self.head_dim).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        return torch.softmax(scores, dim=-1)

    def forward(self, q_hidden: torch.Tensor, kv_hidden: torch.Tensor) -> torch.Tensor:
        b, t, d = q_hidden.shape
        p = kv_hidden.shape[1]
        attn = self.dropout(self.attention_weights(q_hidden, kv_hidden))
        v = self.v_proj(kv_hidden).view(b, p, self.n_heads, self.head_dim).transpose(1, 2)
        y = (attn @ v).transpose(1, 2).reshape(b, t, d)
        return self.out(y)


class FeedForward(nn.Module):
    def __init__(self, dim: int, hidden: int, dropout: float = 0.0):
        super().__init__()
        self.net = nn.Sequential(
            nn.LayerNorm(dim),
            nn.Linear(dim, hidden),
            nn.SiLU(),
            nn.Dropout(dropout),
            nn.Linear(hidden, dim),
            nn.Dropout(dropout),
        )

    def forward(self, x):
        return self.net(x)


class ConvModule(nn.Module):
    """Conformer convolution module: GLU pointwise, depthwise, pointwise."""

    def __init__(self, dim: int, kernel: int, dropout: float = 0.0):
        super().__init__()
        self.norm = nn.LayerNorm(dim)
        self.pointwise1 = nn.Conv1d(dim, 2 * dim, 1)
        self.depthwise = nn.Conv1d(dim, dim, kernel, padding=kernel // 2, groups=dim)
        self.pointwise2 = nn.Conv1d(dim, dim, 1)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x):
        h = self.norm(x).transpose(1, 2)
        h = F.glu(self.pointwise1(h), dim=1)
        h = F.silu(self.depthwise(h))
        h = self.pointwise2(h).transpose(1, 2)
        return self.dropout(h)


class ConformerBlock(nn.Module):
    def __init__(self, cfg: ModelConfig, kv_dim: int):
        super().__init__()
        d = cfg.attn_dim
        self.ff1 = FeedForward(d, cfg.ff_hidden, cfg.dropout)
        self.self_norm = nn.LayerNorm(d)
        self.self_attn = RelPositionSelfAttention(d, cfg.n_heads, cfg.dropout)
        self.cross_norm = nn.LayerNorm(d)
        self.cross_attn = PositionAgnosticCrossAttention(d, kv_dim, cfg.n_heads, cfg.dropout)
        self.conv = ConvModule(d, cfg.conv_kernel, cfg.dropout)
        self.ff2 = FeedForward(d, cfg.ff_hidden, cfg.dropout)
        self.final_norm = nn.LayerNorm(d)

    def forward(self, x: torch.Tensor, prompt_kv: torch.Tensor) -> torch.Tensor:
        x = x + 0.5 * self.ff1(x)
        x = x + self.self_attn(self.self_norm(x))
        x = x + self.cross_attn(self.cross_norm(x), prompt_kv)
        x = x + self.conv(x)
        x = x + 0.5 * self.ff2(x)
        return self.final_norm(x)


class Frontend(nn.Module):
    """Content projection + prompt prenet + Conformer blocks + mel head."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.content_proj = nn.Linear(cfg.content_dim, cfg.attn_dim)
        self.prenet = PromptPrenet(cfg.prompt_dim, cfg.prenet_dims, cfg.prenet_kernel)
        self.blocks = nn.ModuleList(
            ConformerBlock(cfg, self.prenet.out_dim) for _ in range(cfg.n_blocks)
        )
        self.mel_head = nn.Linear(cfg.attn_dim, cfg.n_mels)

    def forward(self, content: torch.Tensor, prompt: torch.Tensor):
        """content: (B, T, content_dim); prompt: (B, P, prompt_dim).

        Returns (hidden (B, T, attn_dim), mel_pred (B, T, n_mels)).
        Unbatched 2-D inputs are accepted and returned unbatched.
        """
        unbatched = content.dim() == 2
        if unbatched:
            content = content.unsqueeze(0)
            prompt = prompt.unsqueeze(0)
        if content.shape[-1] != self.cfg.content_dim:
            raise ValueError(
                f"content dim {content.shape[-1]} != configured {self.cfg.content_dim}"
            )
        if prompt.shape[-1] != self.cfg.prompt_dim:
            raise ValueError(
                f"prompt dim {prompt.shape[-1]} != configured {self.cfg.prompt_dim}"
            )
        kv = self.prenet(prompt)
        x = self.content_proj(content)
        for block in self.blocks:
            x = block(x, kv)
        mel_pred = self.mel_head(x)
        if unbatched:
            return x.squeeze(0), mel_pred.squeeze(0)
        return x, mel_pred
