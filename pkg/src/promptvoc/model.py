"""End-to-end model bundle: frontend + generator plus the feature
provisioning needed to go from raw audio to waveform, and versioned
checkpoint I/O.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import torch

from .config import ModelConfig, TrainConfig
from .dsp import MelConfig, Waveform
from .features import (
    CodebookSet,
    SyntheticPromptExtractor,
    SyntheticTokenizer,
    TokenSeq,
    embed_tokens,
    mean_pool,
    tokenize,
)
from .frontend import Frontend
from .generator import Generator

CHECKPOINT_SCHEMA = "promptvoc-ckpt-1"


def prepare_inputs(tokens: TokenSeq, prompt_feats: np.ndarray, codebooks: CodebookSet):
    """Token/prompt numpy inputs to (content, prompt, speaker) float32 tensors.

    The speaker vector is mean-pooled from the raw prompt features, before
    the prenet, so conditioning is exactly permutation-invariant.
    """
    content = torch.tensor(embed_tokens(tokens, codebooks), dtype=torch.float32)
    prompt = torch.tensor(np.asarray(prompt_feats), dtype=torch.float32)
    speaker = torch.tensor(mean_pool(prompt_feats), dtype=torch.float32)
    return content, prompt, speaker


class VoiceConverter:
    """Inference pipeline: tokens + prompt -> waveform."""

    def __init__(
        self,
        cfg: ModelConfig,
        frontend: Frontend,
        generator: Generator,
        codebooks: CodebookSet,
        tokenizer: SyntheticTokenizer | None = None,
        extractor: SyntheticPromptExtractor | None = None,
        min_reference_s: float = 1.0,
    ):
        self.cfg = cfg
        self.frontend = frontend.eval()
        self.generator = generator.eval()
        self.codebooks = codebooks
        self.tokenizer = tokenizer
        self.extractor = extractor
        self.min_reference_s = min_reference_s

    @torch.no_grad()
    def synthesize(self, tokens: TokenSeq, prompt_feats: np.ndarray) -> Waveform:
        content, prompt, speaker = prepare_inputs(tokens, prompt_feats, self.codebooks)
        hidden, _ = self.frontend(content, prompt)
        wav = self.generator(hidden, speaker)
        return Waveform(samples=wav.numpy().astype(np.float64), sample_rate=self.cfg.sample_rate)

    def resynthesize(self, source: Waveform, prompt: Waveform | None = None) -> Waveform:
        if self.tokenizer is None or self.extractor is None:
            raise ValueError("model has no built-in tokenizer/extractor; supply feature files")
        tokens = tokenize(source, self.tokenizer)
        prompt_feats = self.extractor.extract(prompt if prompt is not None else source)
        return self.synthesize(tokens, prompt_feats)

    def convert(self, source: Waveform, reference: Waveform) -> Waveform:
        if reference.duration_s < self.min_reference_s:
            raise ValueError(
                f"reference is {reference.duration_s:.2f}s; "
                f"at least {self.min_reference_s:.2f}s is required"
            )
        return self.resynthesize(source, prompt=reference)


def _tokenizer_state(tok: SyntheticTokenizer | None):
    if tok is None:
        return None
    return {
        "centroids": [np.asarray(c) for c in tok.centroids],
        "mel_cfg": dataclasses.asdict(tok.mel_cfg),
        "content_dim": tok.content_dim,
        "seed": tok.seed,
    }


def _tokenizer_from_state(state):
    if state is None:
        return None
    return SyntheticTokenizer(
        state["centroids"],
        MelConfig(**state["mel_cfg"]),
        content_dim=state["content_dim"],
        seed=state["seed"],
    )


def _extractor_state(ex: SyntheticPromptExtractor | None):
    if ex is None:
        return None
    return {"prompt_dim": ex.prompt_dim, "mel_cfg": dataclasses.asdict(ex.mel_cfg), "seed": ex.seed}


def _extractor_from_state(state):
    if state is None:
        return None
    return SyntheticPromptExtractor(
        prompt_dim=state["prompt_dim"], mel_cfg=MelConfig(**state["mel_cfg"]), seed=state["seed"]
    )


def save_checkpoint(
    path,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    frontend: Frontend,
    generator: Generator,
    codebooks: CodebookSet,
    tokenizer: SyntheticTokenizer | None = None,
    extractor: SyntheticPromptExtractor | None = None,
    step: int = 0,
    extra: dict | None = None,
) -> None:
    payload = {
        "schema_version": CHECKPOINT_SCHEMA,
        "model_config": dataclasses.asdict(model_cfg),
        "train_config": dataclasses.asdict(train_cfg),
        "frontend": frontend.state_dict(),
        "generator": generator.state_dict(),
        "codebooks": [np.asarray(t) for t in codebooks.tables],
        "tokenizer": _tokenizer_state(tokenizer),
        "extractor": _extractor_state(extractor),
        "step": step,
    }
    if extra:
        payload.update(extra)
    torch.save(payload, path)


def load_checkpoint(path) -> dict:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if payload.get("schema_version") != CHECKPOINT_SCHEMA:
        raise ValueError(
            f"unsupported checkpoint schema {payload.get('schema_version')!r}"
        )
    return payload


def converter_from_checkpoint(path, min_reference_s: float = 1.0) -> VoiceConverter:
    payload = load_checkpoint(path)
    cfg = ModelConfig(**payload["model_config"])
    frontend = Frontend(cfg)
    frontend.load_state_dict(payload["frontend"])
    generator = Generator(cfg)
    generator.load_state_dict(payload["generator"])
    return VoiceConverter(
        cfg,
        frontend,
        generator,
        CodebookSet(tables=tuple(payload["codebooks"])),
        tokenizer=_tokenizer_from_state(payload["tokenizer"]),
        extractor=_extractor_from_state(payload["extractor"]),
        min_reference_s=min_reference_s,
    )
