"""Objective evaluation: speaker-embedding cosine similarity and pitch
contour correlation.  Speaker embeddings come from external verification
models via feature files; only the metric math lives here.
"""

from __future__ import annotations

import numpy as np

from .dsp import Waveform, pitch_correlation, track_pitch


def secs(embed_a: np.ndarray, embed_b: np.ndarray) -> float:
    """Cosine similarity between two speaker embeddings, in [-1, 1]."""
    a = np.asarray(embed_a, dtype=np.float64).ravel()
    b = np.asarray(embed_b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"embedding dims differ: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("speaker embeddings must be nonzero")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def eval_pcorr(
    source: Waveform,
    converted: Waveform,
    f0_min: float = 50.0,
    f0_max: float = 600.0,
) -> float:
    """Pitch-contour Pearson correlation over commonly voiced frames."""
    a = track_pitch(source, f0_min, f0_max)
    b = track_pitch(converted, f0_min, f0_max)
    return pitch_correlation(a, b)
