"""From waveform to discrete tokens and back.

Builds a small synthetic corpus, fits the stand-in tokenizer, shows the
grouped token ids for one utterance, and re-synthesizes it through an
untrained model to demonstrate the end-to-end plumbing (the audio is
noise-like until the model is trained; see demo 04).

Run:  python3 demos/03_tokenize_and_resynthesize.py
"""

import tempfile

import torch

from promptvoc.config import desk_model_config
from promptvoc.dsp import MelConfig, load_wav, save_wav
from promptvoc.features import SyntheticPromptExtractor, fit_synthetic_tokenizer, tokenize
from promptvoc.frontend import Frontend
from promptvoc.generator import Generator
from promptvoc.model import VoiceConverter
from promptvoc.toydata import make_toy_corpus


def main():
    cfg = desk_model_config()
    mel_cfg = MelConfig(sample_rate=cfg.sample_rate, n_mels=cfg.n_mels)
    with tempfile.TemporaryDirectory() as tmp:
        pairs = make_toy_corpus(tmp, n_utterances=8, n_speakers=4, seed=0)
        corpus = [load_wav(p) for p, _ in pairs]

        tok = fit_synthetic_tokenizer(corpus, groups=cfg.groups,
                                      codebook_size=cfg.codebook_size,
                                      mel_cfg=mel_cfg, content_dim=cfg.content_dim, seed=0)
        w = corpus[0]
        tokens = tokenize(w, tok)
        print(f"{w.duration_s:.2f} s of audio -> {tokens.frames} frames x "
              f"{tokens.groups} groups of ids in [0, {tok.codebook_size})")
        print("first 10 frames:", tokens.ids[:10].tolist())

        ext = SyntheticPromptExtractor(prompt_dim=cfg.prompt_dim, mel_cfg=mel_cfg, seed=0)
        torch.manual_seed(0)
        converter = VoiceConverter(cfg, Frontend(cfg), Generator(cfg), tok.codebooks,
                                   tokenizer=tok, extractor=ext)
        out = converter.resynthesize(w)
        print(f"resynthesized {len(out)} samples "
              f"({tokens.frames} frames x {cfg.hop} samples/frame)")
        save_wav(f"{tmp}/resynth.wav", out)
        print(f"wrote {tmp}/resynth.wav (untrained weights, so expect noise)")


if __name__ == "__main__":
    main()
