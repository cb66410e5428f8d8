"""Snake and speaker-adaptive Snake activations.

The plain form is f(x) = x + sin^2(alpha*x) / beta per channel.  The
adaptive form shifts both frequency and magnitude by a shared tanh
transform of a speaker vector:

    t = tanh(W s + b)
    f(x, s) = x + sin^2((alpha + t) * x) / (beta + t/2)

With W = 0 and b = 0 the adaptive form follows the exact same code path
as the plain one, so the two are bitwise identical there.
"""

from __future__ import annotations

import torch
from torch import nn

DIVISOR_FLOOR = 1e-9


def _safe_divisor(beta: torch.Tensor) -> torch.Tensor:
    # Sign-preserving clamp with a magnitude floor; copysign maps 0 to +floor.
    floor = torch.full_like(beta, DIVISOR_FLOOR)
    return torch.where(beta.abs() < DIVISOR_FLOOR, torch.copysign(floor, beta), beta)


def snake(x: torch.Tensor, alpha: torch.Tensor, beta: torch.Tensor) -> torch.Tensor:
    """Elementwise Snake; alpha/beta broadcast against x (typically per channel)."""
    return x + torch.sin(alpha * x) ** 2 / _safe_divisor(beta)


def condition_transform(s: torch.Tensor, weight: torch.Tensor, bias: torch.Tensor) -> torch.Tensor:
    """tanh(W s + b): maps a speaker vector to a per-channel shift in (-1, 1).

    ``s`` is (d,) or (batch, d); ``weight`` is (channels, d); ``bias`` (channels,).
    """
    if s.shape[-1] != weight.shape[-1]:
        raise ValueError(
            f"speaker vector dim {s.shape[-1]} does not match weight dim {weight.shape[-1]}"
        )
    return torch.tanh(s @ weight.T + bias)


def adaptive_snake(
    x: torch.Tensor,
    s: torch.Tensor,
    alpha: torch.Tensor,
    beta: torch.Tensor,
    weight: torch.Tensor,
    bias: torch.Tensor,
) -> torch.Tensor:
    """Adaptive Snake with the same transform feeding frequency and magnitude.

    ``x`` is (..., channels, time); ``alpha``/``beta`` broadcast like in
    :func:`snake`; ``s`` is (d,) or (batch, d).
    """
    t = condition_transform(s, weight, bias).unsqueeze(-1)  # broadcast over time
    return snake(x, alpha + t, beta + 0.5 * t)


class Snake(nn.Module):
    """Per-channel Snake with log-scale alpha/beta (init 0, i.e. alpha=beta=1)."""

    def __init__(self, channels: int):
        super().__init__()
        self.channels = channels
        self.log_alpha = nn.Parameter(torch.zeros(channels))
        self.log_beta = nn.Parameter(torch.zeros(channels))

    def materialize(self):
        return torch.exp(self.log_alpha), torch.exp(self.log_beta)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: (B, C, T) or (C, T)
        alpha, beta = self.materialize()
        return snake(x, alpha.unsqueeze(-1), beta.unsqueeze(-1))


class AdaptiveSnake(nn.Module):
    """Speaker-conditioned Snake; zero-initialized W and b start it at plain Snake."""

    def __init__(self, channels: int, cond_dim: int):
        super().__init__()
        self.channels = channels
        self.cond_dim = cond_dim
        self.log_alpha = nn.Parameter(torch.zeros(channels))
        self.log_beta = nn.Parameter(torch.zeros(channels))
        self.weight = nn.Parameter(torch.zeros(channels, cond_dim))
        self.bias = nn.Parameter(torch.zeros(channels))

    def materialize(self):
        return torch.exp(self.log_alpha), torch.exp(self.log_beta)

    def forward(self, x: torch.Tensor, s: torch.Tensor) -> torch.Tensor:
        # x: (B, C, T) or (C, T); s: (d,) or (B, d)
        alpha, beta = self.materialize()
        return adaptive_snake(
            x, s, alpha.unsqueeze(-1), beta.unsqueeze(-1), self.weight, self.bias
        )
