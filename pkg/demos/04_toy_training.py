"""A short adversarial training run on the synthetic corpus.

Trains the desk-scale model for a few hundred steps on harmonic-complex
"speakers" and prints the loss trajectory; the auxiliary frontend mel
loss should drop clearly even this early.  The full 2000-step run used
by the acceptance suite takes about 15 minutes on one CPU core.

Run:  python3 demos/04_toy_training.py [steps]
"""

import sys
import tempfile
import time

import torch

from promptvoc.config import desk_model_config, desk_train_config
from promptvoc.data import SyntheticFeatureProvider, build_manifest
from promptvoc.dsp import MelConfig, load_wav
from promptvoc.features import SyntheticPromptExtractor, fit_synthetic_tokenizer
from promptvoc.toydata import make_toy_corpus
from promptvoc.trainer import Trainer


def main(steps=300):
    torch.set_num_threads(1)
    model_cfg = desk_model_config()
    train_cfg = desk_train_config(steps=steps)
    mel_cfg = MelConfig(sample_rate=model_cfg.sample_rate, n_mels=model_cfg.n_mels)

    with tempfile.TemporaryDirectory() as tmp:
        make_toy_corpus(f"{tmp}/corpus", n_utterances=32, n_speakers=8, seed=0)
        manifest = build_manifest(f"{tmp}/corpus", min_s=train_cfg.min_duration_s,
                                  max_s=train_cfg.max_duration_s)
        corpus = [load_wav(e.audio_path) for e in manifest.entries[:8]]
        tok = fit_synthetic_tokenizer(corpus, groups=model_cfg.groups,
                                      codebook_size=model_cfg.codebook_size,
                                      mel_cfg=mel_cfg, content_dim=model_cfg.content_dim,
                                      seed=0)
        ext = SyntheticPromptExtractor(prompt_dim=model_cfg.prompt_dim,
                                       mel_cfg=mel_cfg, seed=0)
        provider = SyntheticFeatureProvider(tok, ext)
        trainer = Trainer(model_cfg, train_cfg, manifest, provider, f"{tmp}/work",
                          tokenizer=tok, extractor=ext)

        print(f"training {steps} steps on {len(manifest)} utterances...")
        t0 = time.time()
        while trainer.step < steps:
            m = trainer.train_step()
            if trainer.step % 50 == 0 or trainer.step == 1:
                print(f"step {m['step']:4d}  d={m['loss_d']:.3f}  adv={m['loss_adv']:.3f}  "
                      f"fm={m['loss_fm']:.3f}  mel={m['loss_mel']:.3f}  aux={m['loss_aux']:.3f}")
        dt = time.time() - t0
        print(f"\n{dt:.1f} s total ({dt / steps * 1000:.0f} ms/step)")
        path = trainer.save(f"{tmp}/final.pt")
        print("checkpoint saved; resume or run inference with the promptvoc CLI")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 300)
