"""Shared fixtures: a small synthetic corpus, fitted feature extractors,
and micro-scale configurations that keep unit tests fast on one CPU core.
"""

import numpy as np
import pytest
import torch

from promptvoc.config import desk_model_config, desk_train_config
from promptvoc.data import SyntheticFeatureProvider, build_manifest
from promptvoc.dsp import MelConfig, load_wav
from promptvoc.features import SyntheticPromptExtractor, fit_synthetic_tokenizer
from promptvoc.toydata import make_toy_corpus

torch.set_num_threads(1)


def micro_model_config(**overrides):
    """Even smaller than the desk preset; for mechanics-only tests."""
    base = dict(
        content_dim=64,
        codebook_size=8,
        prompt_dim=64,
        attn_dim=48,
        ff_hidden=64,
        prenet_dims=(32, 48),
        base_channels=16,
        amp_kernel_sizes=(3,),
        amp_dilations=(1,),
        mpd_channels=4,
        msd_channels=4,
        dropout=0.0,
    )
    base.update(overrides)
    return desk_model_config(**base)


def micro_train_config(**overrides):
    base = dict(steps=3, crop_frames=16, max_batch_s=0.2, min_duration_s=1.0,
                min_prompt_frames=200, checkpoint_every=2)
    base.update(overrides)
    return desk_train_config(**base)


@pytest.fixture(scope="session")
def toy_corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy_corpus")
    make_toy_corpus(root, n_utterances=10, n_speakers=4, duration_range=(2.0, 3.0), seed=11)
    return root


@pytest.fixture(scope="session")
def toy_manifest(toy_corpus_dir):
    return build_manifest(toy_corpus_dir, min_s=1.0, max_s=30.0)


@pytest.fixture(scope="session")
def micro_pipeline(toy_manifest):
    """(model_cfg, tokenizer, extractor, provider) at micro scale."""
    cfg = micro_model_config()
    mel_cfg = MelConfig(sample_rate=cfg.sample_rate, n_mels=cfg.n_mels)
    corpus = [load_wav(e.audio_path) for e in toy_manifest.entries[:4]]
    tok = fit_synthetic_tokenizer(
        corpus, groups=cfg.groups, codebook_size=cfg.codebook_size,
        mel_cfg=mel_cfg, content_dim=cfg.content_dim, seed=5,
    )
    ext = SyntheticPromptExtractor(prompt_dim=cfg.prompt_dim, mel_cfg=mel_cfg, seed=5)
    return cfg, tok, ext, SyntheticFeatureProvider(tok, ext)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
