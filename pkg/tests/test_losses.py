"""Loss oracles: LS-GAN identities, feature matching arithmetic, mel L1,
the warmup gate, and numpy/torch mel agreement.
"""

import numpy as np
import pytest
import torch

from promptvoc.dsp import MelConfig, Waveform, mel_spectrogram
from promptvoc.losses import (
    LossWeights,
    TorchMel,
    aux_weight,
    feature_matching_loss,
    lsgan_d_loss,
    lsgan_g_loss,
    mel_l1,
)


class TestLsgan:
    def test_perfect_discriminator_zero_loss(self):
        real = [torch.ones(2, 1, 10)]
        fake = [torch.zeros(2, 1, 10)]
        assert lsgan_d_loss(real, fake).item() == 0.0

    def test_perfect_generator_zero_loss(self):
        assert lsgan_g_loss([torch.ones(2, 1, 10)]).item() == 0.0

    def test_half_scores_analytic(self):
        real = [torch.full((1, 1, 4), 0.5)]
        fake = [torch.full((1, 1, 4), 0.5)]
        assert abs(lsgan_d_loss(real, fake).item() - 0.5) <= 1e-7

    def test_sums_over_sub_discriminators(self):
        real = [torch.zeros(1, 1, 4)] * 3
        fake = [torch.zeros(1, 1, 4)] * 3
        assert abs(lsgan_d_loss(real, fake).item() - 3.0) <= 1e-7


class TestFeatureMatching:
    def test_identical_features_zero(self):
        feats = [[torch.randn(1, 4, 10) for _ in range(3)]]
        assert feature_matching_loss(feats, feats).item() == 0.0

    def test_unit_offset_counts_sub_discriminators(self):
        real = [[torch.zeros(1, 4, 10) for _ in range(3)] for _ in range(2)]
        fake = [[torch.ones(1, 4, 10) for _ in range(3)] for _ in range(2)]
        assert abs(feature_matching_loss(real, fake).item() - 2.0) <= 1e-7

    def test_nonnegative(self):
        g = torch.Generator().manual_seed(0)
        real = [[torch.randn(1, 4, 10, generator=g) for _ in range(3)]]
        fake = [[torch.randn(1, 4, 10, generator=g) for _ in range(3)]]
        assert feature_matching_loss(real, fake).item() >= 0.0

    def test_incongruent_rejected(self):
        with pytest.raises(ValueError):
            feature_matching_loss([[torch.zeros(2)]], [[torch.zeros(2), torch.zeros(2)]])
        with pytest.raises(ValueError):
            feature_matching_loss([[torch.zeros(2)]], [[torch.zeros(3)]])


class TestMelL1:
    def test_identical_zero(self):
        m = torch.randn(10, 80)
        assert mel_l1(m, m).item() == 0.0

    def test_constant_offset(self):
        m = torch.randn(10, 80)
        assert abs(mel_l1(m + 2.0, m).item() - 2.0) <= 1e-6

    def test_symmetry(self):
        a, b = torch.randn(10, 80), torch.randn(10, 80)
        assert mel_l1(a, b).item() == mel_l1(b, a).item()

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            mel_l1(torch.zeros(10, 80), torch.zeros(11, 80))


class TestAuxWeight:
    def test_schedule(self):
        w = LossWeights()
        assert aux_weight(0, w) == 60.0
        assert aux_weight(w.aux_warmup_steps - 1, w) == 60.0
        assert aux_weight(w.aux_warmup_steps, w) == 0.0
        assert aux_weight(10 * w.aux_warmup_steps, w) == 0.0

    def test_zero_warmup_always_off(self):
        w = LossWeights(aux_warmup_steps=0)
        assert aux_weight(0, w) == 0.0

    def test_negative_step_rejected(self):
        with pytest.raises(ValueError):
            aux_weight(-1, LossWeights())

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            LossWeights(mel=-1.0)


class TestTorchMel:
    def test_matches_numpy_reference(self, rng):
        cfg = MelConfig()
        tm = TorchMel(cfg)
        for n in (24000, 25000, 5000):
            x = rng.standard_normal(n) * 0.2
            ref = mel_spectrogram(Waveform(x), cfg)
            got = tm(torch.tensor(x, dtype=torch.float32)).numpy()
            assert got.shape == ref.shape
            assert np.max(np.abs(got - ref)) <= 1e-4

    def test_batched(self, rng):
        tm = TorchMel()
        x = torch.tensor(rng.standard_normal((3, 24000)) * 0.2, dtype=torch.float32)
        mel = tm(x)
        assert mel.shape == (3, 100, 80)

    def test_differentiable(self):
        tm = TorchMel()
        x = torch.randn(4800, requires_grad=True) * 0.1
        tm(x).sum().backward()
