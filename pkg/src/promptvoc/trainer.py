"""Adversarial training loop with warmup scheduling, JSONL metric logging,
checkpointing, and deterministic resumption.

Determinism model: the data drawn at step k and the torch RNG at step k are
both derived from (seed, k), so a resumed run replays exactly the same
steps as an uninterrupted one.
"""

from __future__ import annotations

import json
import os
import random

import numpy as np
import torch

from .config import ModelConfig, TrainConfig
from .data import Manifest, make_training_example
from .discriminators import MultiPeriodDiscriminator, MultiScaleDiscriminator
from .dsp import MelConfig
from .features import CodebookSet, embed_tokens, mean_pool
from .frontend import Frontend
from .generator import Generator
from .losses import (
    LossWeights,
    TorchMel,
    aux_weight,
    feature_matching_loss,
    lsgan_d_loss,
    lsgan_g_loss,
    mel_l1,
)
from .model import save_checkpoint, load_checkpoint


class NonFiniteLossError(RuntimeError):
    """A loss term stopped being finite; carries the offending term's name."""


def _derived_seed(seed: int, step: int) -> int:
    return (seed * 1_000_003 + step) % (2**63 - 1)


class Trainer:
    def __init__(
        self,
        model_cfg: ModelConfig,
        train_cfg: TrainConfig,
        manifest: Manifest,
        provider,
        workdir,
        codebooks: CodebookSet | None = None,
        tokenizer=None,
        extractor=None,
    ):
        if len(manifest) == 0:
            raise ValueError("manifest is empty")
        self.model_cfg = model_cfg
        self.train_cfg = train_cfg
        self.manifest = manifest
        self.provider = provider
        self.workdir = workdir
        os.makedirs(workdir, exist_ok=True)
        self.tokenizer = tokenizer if tokenizer is not None else getattr(provider, "tokenizer", None)
        self.extractor = extractor if extractor is not None else getattr(provider, "extractor", None)
        if codebooks is None:
            if self.tokenizer is None:
                raise ValueError("need either explicit codebooks or a tokenizer that owns them")
            codebooks = self.tokenizer.codebooks
        self.codebooks = codebooks

        random.seed(train_cfg.seed)
        np.random.seed(train_cfg.seed % 2**32)
        torch.manual_seed(train_cfg.seed)

        self.frontend = Frontend(model_cfg)
        self.generator = Generator(model_cfg)
        self.mpd = MultiPeriodDiscriminator(model_cfg)
        self.msd = MultiScaleDiscriminator(model_cfg)
        self.mel = TorchMel(MelConfig(sample_rate=model_cfg.sample_rate, n_mels=model_cfg.n_mels))
        self.weights = LossWeights(
            adv=train_cfg.adv_weight,
            feat_match=train_cfg.feat_match_weight,
            mel=train_cfg.mel_weight,
            aux_mel=train_cfg.aux_mel_weight,
            aux_warmup_steps=train_cfg.aux_warmup_steps,
        )

        g_params = list(self.frontend.parameters()) + list(self.generator.parameters())
        d_params = list(self.mpd.parameters()) + list(self.msd.parameters())
        betas = (train_cfg.beta1, train_cfg.beta2)
        self.opt_g = torch.optim.AdamW(g_params, lr=train_cfg.lr_g, betas=betas)
        self.opt_d = torch.optim.AdamW(d_params, lr=train_cfg.lr_d, betas=betas)
        self.sched_g = torch.optim.lr_scheduler.StepLR(
            self.opt_g, step_size=train_cfg.decay_every, gamma=train_cfg.lr_decay
        )
        self.sched_d = torch.optim.lr_scheduler.StepLR(
            self.opt_d, step_size=train_cfg.decay_every, gamma=train_cfg.lr_decay
        )
        self.step = 0
        self._cache: dict = {}

    # ---------------------------------------------------------------- data

    def _load_entry(self, entry):
        cached = self._cache.get(entry.utterance_id)
        if cached is None:
            cached = self.provider.load(entry, self.model_cfg.sample_rate)
            self._cache[entry.utterance_id] = cached
        return cached

    def _examples_for_step(self, step: int):
        cfg = self.train_cfg
        rng = np.random.default_rng(_derived_seed(cfg.seed, step))
        hop = self.model_cfg.hop
        examples = []
        budget = 0.0
        cached_provider = _CachedProvider(self)
        while True:
            idx = int(rng.integers(len(self.manifest)))
            entry = self.manifest.entries[idx]
            ex = make_training_example(
                entry,
                cached_provider,
                rng,
                sample_rate=self.model_cfg.sample_rate,
                target_mode=cfg.target_mode,
                min_prompt_frames=cfg.min_prompt_frames,
            )
            if cfg.crop_frames > 0 and ex.tokens.frames > cfg.crop_frames:
                start = int(rng.integers(0, ex.tokens.frames - cfg.crop_frames + 1))
                ex.tokens = type(ex.tokens)(
                    ids=ex.tokens.ids[start : start + cfg.crop_frames],
                    frame_rate=ex.tokens.frame_rate,
                )
                ex.target = ex.target[start * hop : (start + cfg.crop_frames) * hop]
            dur = len(ex.target) / self.model_cfg.sample_rate
            if examples and budget + dur > cfg.max_batch_s:
                break
            examples.append(ex)
            budget += dur
            if budget >= cfg.max_batch_s:
                break
        return examples

    def _tensors_for_step(self, step: int):
        examples = self._examples_for_step(step)
        t_min = min(e.tokens.frames for e in examples)
        p_min = min(len(e.prompt) for e in examples)
        hop = self.model_cfg.hop
        content = np.stack(
            [embed_tokens(_truncate(e.tokens, t_min), self.codebooks) for e in examples]
        )
        prompt = np.stack([e.prompt[:p_min] for e in examples])
        target = np.stack([e.target[: t_min * hop] for e in examples])
        speaker = np.stack([mean_pool(e.prompt) for e in examples])
        return (
            torch.tensor(content, dtype=torch.float32),
            torch.tensor(prompt, dtype=torch.float32),
            torch.tensor(speaker, dtype=torch.float32),
            torch.tensor(target, dtype=torch.float32),
        )

    # ------------------------------------------------------------ training

    def train_step(self) -> dict:
        step = self.step
        cfg = self.train_cfg
        if cfg.deterministic:
            torch.manual_seed(_derived_seed(cfg.seed, step) ^ 0x5EED)
        content, prompt, speaker, target = self._tensors_for_step(step)

        self.frontend.train()
        self.generator.train()
        hidden, mel_pred = self.frontend(content, prompt)
        wav = self.generator(hidden, speaker)
        with torch.no_grad():
            mel_target = self.mel(target)

        # Discriminator update on real vs detached fake.
        fake = wav.detach()
        d_real_mpd, d_real_msd = self.mpd(target), self.msd(target)
        d_fake_mpd, d_fake_msd = self.mpd(fake), self.msd(fake)
        loss_d = lsgan_d_loss(d_real_mpd.scores, d_fake_mpd.scores) + lsgan_d_loss(
            d_real_msd.scores, d_fake_msd.scores
        )
        self._check_finite("discriminator", loss_d, step)
        self.opt_d.zero_grad()
        loss_d.backward()
        grad_d = torch.nn.utils.clip_grad_norm_(
            list(self.mpd.parameters()) + list(self.msd.parameters()), 1e9
        )
        self.opt_d.step()

        # Generator update: adversarial + feature matching + mel + gated aux mel.
        g_fake_mpd, g_fake_msd = self.mpd(wav), self.msd(wav)
        with torch.no_grad():
            g_real_mpd, g_real_msd = self.mpd(target), self.msd(target)
        loss_adv = lsgan_g_loss(g_fake_mpd.scores) + lsgan_g_loss(g_fake_msd.scores)
        loss_fm = feature_matching_loss(
            g_real_mpd.feats, g_fake_mpd.feats
        ) + feature_matching_loss(g_real_msd.feats, g_fake_msd.feats)
        loss_mel = mel_l1(self.mel(wav), mel_target)
        loss_aux = mel_l1(mel_pred, mel_target)
        aux_w = aux_weight(step, self.weights)
        for name, term in (
            ("adversarial", loss_adv),
            ("feature_matching", loss_fm),
            ("mel", loss_mel),
            ("aux_mel", loss_aux),
        ):
            self._check_finite(name, term, step)
        loss_g = (
            self.weights.adv * loss_adv
            + self.weights.feat_match * loss_fm
            + self.weights.mel * loss_mel
            + aux_w * loss_aux
        )
        self.opt_g.zero_grad()
        loss_g.backward()
        grad_g = torch.nn.utils.clip_grad_norm_(
            list(self.frontend.parameters()) + list(self.generator.parameters()), 1e9
        )
        self.opt_g.step()
        self.sched_g.step()
        self.sched_d.step()
        self.step += 1

        return {
            "step": self.step,
            "loss_d": float(loss_d.detach()),
            "loss_adv": float(loss_adv.detach()),
            "loss_fm": float(loss_fm.detach()),
            "loss_mel": float(loss_mel.detach()),
            "loss_aux": float(loss_aux.detach()),
            "aux_weight": aux_w,
            "loss_g_total": float(loss_g.detach()),
            "grad_norm_g": float(grad_g),
            "grad_norm_d": float(grad_d),
            "lr_g": self.opt_g.param_groups[0]["lr"],
        }

    @staticmethod
    def _check_finite(name, value, step):
        if not torch.isfinite(value):
            raise NonFiniteLossError(f"{name} loss became non-finite at step {step}")

    def train(self, log_path=None) -> str:
        """Run to train_cfg.steps, logging per-step metrics as JSON lines.

        Returns the path of the final checkpoint.
        """
        log_path = log_path or os.path.join(self.workdir, "metrics.jsonl")
        ckpt_path = os.path.join(self.workdir, "checkpoint.pt")
        with open(log_path, "a", encoding="utf-8") as log:
            while self.step < self.train_cfg.steps:
                metrics = self.train_step()
                log.write(json.dumps(metrics) + "\n")
                if self.step % self.train_cfg.checkpoint_every == 0:
                    self.save(ckpt_path)
        self.save(ckpt_path)
        return ckpt_path

    # -------------------------------------------------------- persistence

    def save(self, path) -> None:
        save_checkpoint(
            path,
            self.model_cfg,
            self.train_cfg,
            self.frontend,
            self.generator,
            self.codebooks,
            tokenizer=self.tokenizer,
            extractor=self.extractor,
            step=self.step,
            extra={
                "mpd": self.mpd.state_dict(),
                "msd": self.msd.state_dict(),
                "opt_g": self.opt_g.state_dict(),
                "opt_d": self.opt_d.state_dict(),
                "sched_g": self.sched_g.state_dict(),
                "sched_d": self.sched_d.state_dict(),
                "torch_rng": torch.get_rng_state(),
            },
        )

    @classmethod
    def from_checkpoint(cls, path, manifest: Manifest, provider, workdir) -> "Trainer":
        payload = load_checkpoint(path)
        trainer = cls(
            ModelConfig(**payload["model_config"]),
            TrainConfig(**payload["train_config"]),
            manifest,
            provider,
            workdir,
            codebooks=CodebookSet(tables=tuple(payload["codebooks"])),
        )
        trainer.frontend.load_state_dict(payload["frontend"])
        trainer.generator.load_state_dict(payload["generator"])
        trainer.mpd.load_state_dict(payload["mpd"])
        trainer.msd.load_state_dict(payload["msd"])
        trainer.opt_g.load_state_dict(payload["opt_g"])
        trainer.opt_d.load_state_dict(payload["opt_d"])
        trainer.sched_g.load_state_dict(payload["sched_g"])
        trainer.sched_d.load_state_dict(payload["sched_d"])
        trainer.step = payload["step"]
        torch.set_rng_state(payload["torch_rng"])
        return trainer


class _CachedProvider:
    """Feature provider that reuses the trainer's in-memory cache."""

    def __init__(self, trainer: Trainer):
        self.trainer = trainer

    def load(self, entry, sample_rate):
        return self.trainer._load_entry(entry)


def _truncate(tokens, frames):
    if tokens.frames <= frames:
        return tokens
    return type(tokens)(ids=tokens.ids[:frames], frame_rate=tokens.frame_rate)
