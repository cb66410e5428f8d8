"""Snake / adaptive Snake oracles: worked analytic values, the exact
reduction to the plain form, and autograd-vs-finite-difference agreement.
"""

import math

import numpy as np
import pytest
import torch

from promptvoc.activations import (
    AdaptiveSnake,
    Snake,
    adaptive_snake,
    condition_transform,
    snake,
)


def t64(x):
    return torch.tensor(x, dtype=torch.float64)


class TestSnake:
    def test_zero_input_fixed_point(self):
        for alpha in (0.5, 1.0, 3.0):
            for beta in (0.5, 1.0, 2.0):
                assert snake(t64(0.0), t64(alpha), t64(beta)).item() == 0.0

    def test_analytic_half_pi(self):
        y = snake(t64(math.pi / 2), t64(1.0), t64(1.0)).item()
        assert abs(y - (math.pi / 2 + 1.0)) <= 1e-12
        assert abs(y - 2.570796) <= 1e-6

    def test_periodic_displacement_identity(self, rng):
        x = t64(rng.uniform(-5, 5, size=200))
        for alpha in (0.7, 1.0, 2.5):
            lhs = snake(x + math.pi / alpha, t64(alpha), t64(1.3))
            rhs = snake(x, t64(alpha), t64(1.3)) + math.pi / alpha
            assert torch.max(torch.abs(lhs - rhs)).item() <= 1e-9

    def test_zero_divisor_clamped_finite(self):
        y = snake(t64([1.0, 2.0]), t64(1.0), t64(0.0))
        assert torch.isfinite(y).all()
        yn = snake(t64([1.0]), t64(1.0), t64(-1e-12))
        assert yn.item() < 0  # sign of the divisor is preserved


class TestConditionTransform:
    def test_zero_params_give_zero(self):
        s = t64(np.random.default_rng(0).standard_normal(8))
        t = condition_transform(s, torch.zeros(4, 8, dtype=torch.float64), torch.zeros(4, dtype=torch.float64))
        assert torch.all(t == 0)

    def test_range_strictly_open(self, rng):
        # Moderate magnitudes: float64 tanh saturates to exactly 1.0 when
        # the argument exceeds ~19, so the open interval is a property of
        # non-degenerate inputs.
        s = t64(rng.standard_normal(8))
        w = t64(rng.standard_normal((4, 8)))
        b = t64(rng.standard_normal(4))
        t = condition_transform(s, w, b)
        assert torch.all(t > -1) and torch.all(t < 1)

    def test_atanh_bias_hits_half(self):
        b = t64([math.atanh(0.5)])
        t = condition_transform(t64(np.zeros(3)), torch.zeros(1, 3, dtype=torch.float64), b)
        assert abs(t.item() - 0.5) <= 1e-9

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError):
            condition_transform(torch.zeros(5), torch.zeros(4, 8), torch.zeros(4))


class TestAdaptiveSnake:
    def test_worked_example(self):
        # alpha=1, beta=1, T(s)=0.5 via the atanh bias trick, x=pi/3:
        # pi/3 + sin^2(1.5*pi/3)/1.25 = pi/3 + 0.8
        s = t64(np.zeros(2))
        w = torch.zeros(1, 2, dtype=torch.float64)
        b = t64([math.atanh(0.5)])
        x = t64([[math.pi / 3]])
        y = adaptive_snake(x, s, t64(1.0), t64(1.0), w, b).item()
        assert abs(y - 1.847198) <= 1e-6
        assert abs(y - (math.pi / 3 + 0.8)) <= 1e-9

    def test_reduction_is_bitwise(self, rng):
        # W=0, b=0: identical code path, so equality holds to the bit on
        # a million random inputs.
        x = torch.tensor(rng.standard_normal(1_000_000) * 4, dtype=torch.float32).view(1, 4, -1)
        alpha = torch.tensor([0.5, 1.0, 2.0, 3.7]).view(4, 1)
        beta = torch.tensor([0.3, 1.0, 1.5, 2.0]).view(4, 1)
        s = torch.randn(8)
        w = torch.zeros(4, 8)
        b = torch.zeros(4)
        adaptive = adaptive_snake(x, s, alpha, beta, w, b)
        plain = snake(x, alpha, beta)
        assert torch.equal(adaptive, plain)

    def test_zero_frequency_channel_is_identity(self):
        # alpha + T(s) = 0 kills the sin^2 term entirely.
        s = t64([1.0])
        w = t64([[0.0]])
        b = t64([math.atanh(0.5)])  # T(s) = 0.5
        x = t64([[0.3, -1.2, 2.5]])
        y = adaptive_snake(x, s, t64(-0.5), t64(1.0), w, b)
        assert torch.max(torch.abs(y - x)).item() <= 1e-12

    def test_modules_start_equal(self):
        torch.manual_seed(0)
        plain = Snake(6)
        adaptive = AdaptiveSnake(6, 16)
        x = torch.randn(2, 6, 50)
        s = torch.randn(2, 16)
        assert torch.equal(plain(x), adaptive(x, s))

    def test_module_conditions_on_speaker(self):
        torch.manual_seed(0)
        m = AdaptiveSnake(6, 16)
        with torch.no_grad():
            m.weight.normal_(0, 0.5)
        x = torch.randn(2, 6, 50)
        y1 = m(x, torch.randn(2, 16))
        y2 = m(x, torch.randn(2, 16))
        assert (y1 - y2).abs().max().item() > 0


class TestGradients:
    def test_finite_difference_agreement(self, rng):
        """1000 independent draws: autograd directional derivative matches
        a float64 central difference to 1e-5 relative error."""
        n = 1000
        s = torch.tensor(rng.standard_normal((n, 3)), dtype=torch.float64)

        def forward(x, alpha, beta, w, b):
            # One independent scalar problem per row.
            t = torch.tanh((s * w).sum(dim=1) + b)
            return x + torch.sin((alpha + t) * x) ** 2 / (beta + 0.5 * t)

        x = torch.tensor(rng.uniform(-3, 3, n), requires_grad=True)
        alpha = torch.tensor(rng.uniform(0.2, 2.0, n), requires_grad=True)
        beta = torch.tensor(rng.uniform(0.6, 2.0, n), requires_grad=True)
        w = torch.tensor(rng.standard_normal((n, 3)) * 0.5, requires_grad=True)
        b = torch.tensor(rng.standard_normal(n) * 0.5, requires_grad=True)
        leaves = [x, alpha, beta, w, b]

        # Reference: the scalarized form equals the packaged functional.
        with torch.no_grad():
            scalarized = forward(*[l.detach() for l in leaves])
            for i in range(0, n, 97):
                packed = adaptive_snake(
                    x[i].detach().view(1, 1), s[i], alpha[i].detach().view(1, 1),
                    beta[i].detach().view(1, 1), w[i].detach().view(1, 3),
                    b[i].detach().view(1),
                ).item()
                assert abs(packed - scalarized[i].item()) <= 1e-12

        y = forward(*leaves)
        grads = torch.autograd.grad(y.sum(), leaves)

        dirs = [torch.tensor(rng.standard_normal(l.shape)) for l in leaves]
        analytic = sum(
            (g * d).sum(dim=1) if g.dim() == 2 else g * d for g, d in zip(grads, dirs)
        )
        h = 1e-6
        with torch.no_grad():
            plus = forward(*[l + h * d for l, d in zip(leaves, dirs)])
            minus = forward(*[l - h * d for l, d in zip(leaves, dirs)])
        fd = (plus - minus) / (2 * h)
        rel = torch.abs(fd - analytic) / torch.clamp(torch.abs(analytic), min=1e-4)
        assert rel.max().item() <= 1e-5
