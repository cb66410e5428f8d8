"""Corpus manifesting, prompt-segment sampling, training-example assembly
and duration-bucketed batching.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .dsp import Waveform, load_wav
from .features import (
    SyntheticPromptExtractor,
    SyntheticTokenizer,
    TokenSeq,
    read_feature_file,
    read_token_file,
    tokenize,
)

EDGE_WINDOW_FRAMES = 100  # prompt segments start within 1 s of either edge
MIN_PROMPT_FRAMES = 600  # 6 s at 100 Hz


@dataclass
class ManifestEntry:
    utterance_id: str
    audio_path: str
    duration_s: float
    token_path: str | None = None
    prompt_path: str | None = None


@dataclass
class Manifest:
    entries: list

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for e in self.entries:
                rec = {"id": e.utterance_id, "path": e.audio_path, "duration": e.duration_s}
                if e.token_path:
                    rec["token_path"] = e.token_path
                if e.prompt_path:
                    rec["prompt_path"] = e.prompt_path
                fh.write(json.dumps(rec) + "\n")

    @classmethod
    def load(cls, path) -> "Manifest":
        entries = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                entries.append(
                    ManifestEntry(
                        utterance_id=rec["id"],
                        audio_path=rec["path"],
                        duration_s=rec["duration"],
                        token_path=rec.get("token_path"),
                        prompt_path=rec.get("prompt_path"),
                    )
                )
        return cls(entries=entries)


def build_manifest(root_dir, min_s: float = 6.0, max_s: float = 30.0) -> Manifest:
    """Scan a directory tree for WAV files and keep those within [min_s, max_s]."""
    if not os.path.isdir(root_dir):
        raise FileNotFoundError(f"no such directory: {root_dir}")
    entries = []
    for dirpath, _, names in sorted(os.walk(root_dir)):
        for name in sorted(names):
            if not name.lower().endswith(".wav"):
                continue
            path = os.path.join(dirpath, name)
            w = load_wav(path)
            dur = w.duration_s
            if min_s <= dur <= max_s:
                uid = os.path.relpath(path, root_dir).replace(os.sep, "/")
                entries.append(ManifestEntry(utterance_id=uid, audio_path=path, duration_s=dur))
    if not entries:
        raise ValueError(f"no eligible audio in {root_dir} ({min_s}-{max_s} s)")
    return Manifest(entries=entries)


@dataclass(frozen=True)
class PromptSegment:
    start_frame: int
    len_frames: int


def sample_prompt_segment(
    total_frames: int, rng: np.random.Generator, min_frames: int = MIN_PROMPT_FRAMES
) -> PromptSegment:
    """Draw a prompt segment anchored within 1 s of either utterance edge.

    Length is uniform on [ceil(D/3), floor(D/2)]; the anchored edge is chosen
    uniformly; the offset from that edge is uniform on [0, 100] frames.
    ``min_frames`` may be lowered to 200 for short toy utterances; below
    that the in-bounds guarantee (offset + length <= D) no longer holds.
    """
    d = total_frames
    if min_frames < 2 * EDGE_WINDOW_FRAMES:
        raise ValueError("min_frames below 200 breaks the in-bounds guarantee")
    if d < min_frames:
        raise ValueError(f"need at least {min_frames} frames, got {d}")
    length = int(rng.integers(-(-d // 3), d // 2 + 1))
    offset = int(rng.integers(0, EDGE_WINDOW_FRAMES + 1))
    if rng.integers(0, 2) == 0:
        start = offset
    else:
        start = d - offset - length
    return PromptSegment(start_frame=start, len_frames=length)


class SyntheticFeatureProvider:
    """Computes tokens and prompt features on the fly from audio."""

    def __init__(self, tokenizer: SyntheticTokenizer, extractor: SyntheticPromptExtractor):
        self.tokenizer = tokenizer
        self.extractor = extractor

    def load(self, entry: ManifestEntry, sample_rate: int):
        w = load_wav(entry.audio_path, target_rate=sample_rate)
        return w, tokenize(w, self.tokenizer), self.extractor.extract(w)


class FileFeatureProvider:
    """Reads precomputed token and prompt-feature files named in the manifest."""

    def load(self, entry: ManifestEntry, sample_rate: int):
        if not entry.token_path or not entry.prompt_path:
            raise ValueError(f"entry {entry.utterance_id} has no precomputed feature paths")
        w = load_wav(entry.audio_path, target_rate=sample_rate)
        return w, read_token_file(entry.token_path), read_feature_file(entry.prompt_path)


@dataclass
class TrainingExample:
    utterance_id: str
    tokens: TokenSeq  # content region
    prompt: np.ndarray  # (prompt_frames, prompt_dim)
    target: np.ndarray  # waveform samples aligned to the content region
    content_start: int  # frame offset of the content region in the utterance
    prompt_segment: PromptSegment


def make_training_example(
    entry: ManifestEntry,
    provider,
    rng: np.random.Generator,
    sample_rate: int = 24000,
    target_mode: str = "complement",
    min_prompt_frames: int = MIN_PROMPT_FRAMES,
) -> TrainingExample:
    """Cut a prompt segment and build the aligned (tokens, prompt, target) triple.

    In complement mode the reconstruction target is the contiguous region on
    the far side of the prompt segment; frame f maps to samples
    [hop*f, hop*(f+1)).  In full mode the whole utterance is the target and
    the prompt segment is still cut from it.
    """
    hop = sample_rate // 100
    w, tokens, prompt_feats = provider.load(entry, sample_rate)
    d = min(tokens.frames, len(prompt_feats))
    seg = sample_prompt_segment(d, rng, min_frames=min_prompt_frames)
    prompt = prompt_feats[seg.start_frame : seg.start_frame + seg.len_frames]

    if target_mode == "complement":
        if seg.start_frame <= EDGE_WINDOW_FRAMES:  # anchored at the beginning
            lo, hi = seg.start_frame + seg.len_frames, d
        else:  # anchored at the end
            lo, hi = 0, seg.start_frame
    elif target_mode == "full":
        lo, hi = 0, d
    else:
        raise ValueError(f"unknown target_mode {target_mode!r}")

    content = TokenSeq(ids=tokens.ids[lo:hi], frame_rate=tokens.frame_rate)
    samples = np.zeros(d * hop)
    samples[: min(len(w.samples), d * hop)] = w.samples[: d * hop]
    target = samples[lo * hop : hi * hop]
    return TrainingExample(
        utterance_id=entry.utterance_id,
        tokens=content,
        prompt=prompt,
        target=target,
        content_start=lo,
        prompt_segment=seg,
    )


def example_rng(global_seed: int, utterance_index: int) -> np.random.Generator:
    """Independent per-utterance RNG stream; reproducible across workers."""
    return np.random.default_rng(global_seed ^ utterance_index)


@dataclass
class Batch:
    tokens: np.ndarray  # (B, T, groups), zero-padded
    prompt: np.ndarray  # (B, P, prompt_dim), zero-padded
    target: np.ndarray  # (B, S), zero-padded
    frame_mask: np.ndarray  # (B, T) bool, True on real frames
    prompt_mask: np.ndarray  # (B, P) bool

    @property
    def size(self) -> int:
        return self.tokens.shape[0]


def _pack(examples) -> Batch:
    b = len(examples)
    t = max(e.tokens.frames for e in examples)
    p = max(len(e.prompt) for e in examples)
    s = max(len(e.target) for e in examples)
    groups = examples[0].tokens.groups
    dim = examples[0].prompt.shape[1]
    tokens = np.zeros((b, t, groups), dtype=np.int64)
    prompt = np.zeros((b, p, dim))
    target = np.zeros((b, s))
    frame_mask = np.zeros((b, t), dtype=bool)
    prompt_mask = np.zeros((b, p), dtype=bool)
    for i, e in enumerate(examples):
        tokens[i, : e.tokens.frames] = e.tokens.ids
        prompt[i, : len(e.prompt)] = e.prompt
        target[i, : len(e.target)] = e.target
        frame_mask[i, : e.tokens.frames] = True
        prompt_mask[i, : len(e.prompt)] = True
    return Batch(tokens, prompt, target, frame_mask, prompt_mask)


def make_batches(
    examples, max_total_s: float = 36.0, sample_rate: int = 24000
) -> list:
    """Greedily pack examples into batches of at most max_total_s target audio."""
    batches = []
    current: list = []
    budget = 0.0
    for e in examples:
        dur = len(e.target) / sample_rate
        if dur > max_total_s:
            raise ValueError(
                f"example {e.utterance_id} ({dur:.1f}s) exceeds the {max_total_s}s batch budget"
            )
        if current and budget + dur > max_total_s:
            batches.append(_pack(current))
            current, budget = [], 0.0
        current.append(e)
        budget += dur
    if current:
        batches.append(_pack(current))
    return batches
