"""Synthetic harmonic-complex corpus for desk-scale experiments.

Each synthetic "speaker" is a (base f0, spectral tilt) pair; utterances
are harmonic complexes with a slowly wandering pitch and an amplitude
envelope.  Tilt is the speaker-identity-bearing trait, so prompt
conditioning can be probed by measuring the long-term spectral slope of
generated audio.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .dsp import Waveform, save_wav


@dataclass(frozen=True)
class ToySpeaker:
    speaker_id: int
    f0_base: float  # Hz
    tilt_db_oct: float  # spectral slope, dB per octave


def toy_speakers(n_speakers: int = 8, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    speakers = []
    for i in range(n_speakers):
        f0 = float(rng.uniform(90.0, 280.0))
        tilt = float(rng.uniform(-12.0, -2.0))
        speakers.append(ToySpeaker(speaker_id=i, f0_base=f0, tilt_db_oct=tilt))
    return speakers


def harmonic_utterance(
    speaker: ToySpeaker,
    duration_s: float,
    sample_rate: int = 24000,
    seed: int = 0,
    max_harmonic_hz: float = 8000.0,
) -> Waveform:
    """Harmonic complex with wandering f0 and the speaker's spectral tilt."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate

    # Slow pitch wander (+-6%) plus a little vibrato.
    wander = np.interp(
        t, np.linspace(0, duration_s, 8), 1.0 + 0.06 * rng.standard_normal(8)
    )
    vibrato = 1.0 + 0.01 * np.sin(2 * np.pi * 5.3 * t + rng.uniform(0, 2 * np.pi))
    f0 = speaker.f0_base * wander * vibrato
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate

    n_harm = max(1, int(max_harmonic_hz / f0.max()))
    x = np.zeros(n)
    for k in range(1, n_harm + 1):
        amp = k ** (speaker.tilt_db_oct / 6.0206)  # dB/octave -> power law
        x += amp * np.sin(k * phase + rng.uniform(0, 2 * np.pi))

    # Syllable-ish amplitude envelope with soft edges.
    env = 0.55 + 0.45 * np.sin(2 * np.pi * rng.uniform(1.5, 3.0) * t + rng.uniform(0, 2 * np.pi))
    fade = min(1200, n // 4)
    env[:fade] *= np.linspace(0, 1, fade)
    env[-fade:] *= np.linspace(1, 0, fade)
    x *= env
    x *= 0.3 / np.max(np.abs(x))
    return Waveform(samples=x, sample_rate=sample_rate)


def make_toy_corpus(
    root_dir,
    n_utterances: int = 64,
    n_speakers: int = 8,
    duration_range=(2.0, 4.0),
    sample_rate: int = 24000,
    seed: int = 0,
) -> list:
    """Write a corpus of WAV files; returns (path, ToySpeaker) pairs."""
    os.makedirs(root_dir, exist_ok=True)
    speakers = toy_speakers(n_speakers, seed=seed)
    rng = np.random.default_rng(seed + 1)
    out = []
    for i in range(n_utterances):
        spk = speakers[i % n_speakers]
        dur = float(rng.uniform(*duration_range))
        w = harmonic_utterance(spk, dur, sample_rate, seed=seed + 100 + i)
        path = os.path.join(root_dir, f"spk{spk.speaker_id}_utt{i:03d}.wav")
        save_wav(path, w)
        out.append((path, spk))
    return out


def spectral_tilt(w: Waveform, fmin: float = 200.0, fmax: float = 6000.0) -> float:
    """Fitted slope (dB per octave) of the long-term power spectrum."""
    x = w.samples * np.hanning(len(w.samples))
    spec = np.abs(np.fft.rfft(x)) ** 2
    freqs = np.fft.rfftfreq(len(x), 1.0 / w.sample_rate)
    band = (freqs >= fmin) & (freqs <= fmax) & (spec > 0)
    log2f = np.log2(freqs[band])
    db = 10.0 * np.log10(spec[band])
    # Average within octave-fraction bins before fitting to de-emphasize peaks.
    edges = np.arange(log2f.min(), log2f.max() + 0.25, 0.25)
    centers, means = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (log2f >= lo) & (log2f < hi)
        if sel.any():
            centers.append((lo + hi) / 2)
            means.append(db[sel].mean())
    slope, _ = np.polyfit(centers, means, 1)
    return float(slope)
